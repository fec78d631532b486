"""Empirical checkers: return bounds, the Fredholm series, area scans and porosity."""

from .area import AreaScan, RecurrenceExponentCheck, area_scan_En, slow_recurrence_exponents
from .fredholm import FredholmSeries, fredholm_eval, fredholm_series, zero_scan
from .porosity import PorosityProbe, porosity_probe
from .returns import (
    BoundCheck,
    CampaignResult,
    Lemma,
    ReturnEvent,
    check_close_return_bound,
    check_return_bound,
    close_return_campaign,
    first_entry,
    julia_sample,
    return_bound_campaign,
)

__all__ = [
    "AreaScan",
    "BoundCheck",
    "CampaignResult",
    "FredholmSeries",
    "Lemma",
    "PorosityProbe",
    "RecurrenceExponentCheck",
    "ReturnEvent",
    "area_scan_En",
    "check_close_return_bound",
    "check_return_bound",
    "close_return_campaign",
    "first_entry",
    "fredholm_eval",
    "fredholm_series",
    "julia_sample",
    "porosity_probe",
    "return_bound_campaign",
    "slow_recurrence_exponents",
    "zero_scan",
]
