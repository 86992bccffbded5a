from .correspondence_analyzer import (
    ACResult,
    AnalyticsReport,
    CrossTab,
    UnsureResult,
    average_correspondence,
    build_report,
    crosstab,
    sex_alignment,
    unsure_fraction,
)
from .report_generator import render_report, report_from_json, round_half_up
from .subgroups import SubgroupKey
