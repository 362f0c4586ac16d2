from .trace import TraceRecord, TraceSink, TRACE_COLUMNS, trace_frame, write_trace_csv
from .stats import percentile, utilization
from .cost import PriceModel, cost_efficiency, energy_efficiency, DEFAULT_ELECTRICITY_PRICE, DEFAULT_LIFETIME_YEARS
from .report import SimReport, MeasurementWindow, STAGES, build_report

__all__ = ["TraceRecord", "TraceSink", "TRACE_COLUMNS", "trace_frame", "write_trace_csv",
           "percentile", "utilization",
           "PriceModel", "cost_efficiency", "energy_efficiency",
           "DEFAULT_ELECTRICITY_PRICE", "DEFAULT_LIFETIME_YEARS",
           "SimReport", "MeasurementWindow", "STAGES", "build_report"]
