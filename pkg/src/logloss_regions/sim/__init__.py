"""Finite-blocklength achievability simulations."""

from .binning import BinAssignment, BinDecoder, TypicalIndex
from .schemes import AkwTimeshareCode, Decoding, JdTimeshareCode, WynerZivCode
from .simulate import (
    SimConfig,
    SimResult,
    exact_expectations,
    repeat_for_peak,
    simulate_jd_timeshare,
    simulate_rd_point,
    simulate_smsw,
    simulate_wz,
    simulate_xd,
)

__all__ = [
    "AkwTimeshareCode",
    "BinAssignment",
    "BinDecoder",
    "Decoding",
    "JdTimeshareCode",
    "SimConfig",
    "SimResult",
    "TypicalIndex",
    "WynerZivCode",
    "exact_expectations",
    "repeat_for_peak",
    "simulate_jd_timeshare",
    "simulate_rd_point",
    "simulate_smsw",
    "simulate_wz",
    "simulate_xd",
]
