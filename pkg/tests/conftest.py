"""Shared helpers for the test suite."""

from __future__ import annotations

import pytest

from kmismatch.fingerprint import FieldConfig


def codes(s: str) -> tuple:
    """Map lowercase letters to 1..26 so hand-written examples read naturally."""
    return tuple(ord(c) - 96 for c in s)


@pytest.fixture
def cfg() -> FieldConfig:
    return FieldConfig.from_seed(12345)


@pytest.fixture
def small_cfg() -> FieldConfig:
    return FieldConfig(p=101, r=7)
