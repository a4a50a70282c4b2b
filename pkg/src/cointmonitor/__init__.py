"""Sequential monitoring for breaks in cointegrating regressions.

The public entry points are :class:`monitor.Monitor` (online) and
:func:`monitor.run` (whole sample), :func:`harness.run_experiment` for
Monte Carlo studies, and the ``cointmonitor`` command line tool.
"""
from .kernels import BACKEND
from .monitor import DetectionReport, Monitor, MonitorConfig, run, run_online

__version__ = "0.1.0"

__all__ = ["BACKEND", "DetectionReport", "Monitor", "MonitorConfig", "run", "run_online", "__version__"]
