"""Prometheus metrics for catamp.

A private registry keeps the engine counters and the validation timings
apart from any process-wide collectors. ``validate --metrics-out PATH``
writes it in the Prometheus text exposition format.
"""

from pathlib import Path

from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, generate_latest

REGISTRY = CollectorRegistry()

SQUEEZE_APPLICATIONS = Counter(
    "catamp_squeeze_applications",
    "Two-mode squeeze applications by method",
    ["method"],
    registry=REGISTRY,
)

TRUNCATION_TAIL = Gauge(
    "catamp_truncation_tail",
    "Tail bound reported by the last squeeze application",
    registry=REGISTRY,
)

CHECK_DURATION = Histogram(
    "catamp_check_duration_seconds",
    "Wall time of validation checks",
    ["check"],
    buckets=(0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 30.0, 60.0, 120.0),
    registry=REGISTRY,
)

CHECKS = Counter(
    "catamp_checks",
    "Validation check outcomes",
    ["check", "status"],
    registry=REGISTRY,
)


def record_squeeze(method: str, tail_bound: float) -> None:
    """Count one squeeze application and publish its tail bound."""
    SQUEEZE_APPLICATIONS.labels(method=method).inc()
    TRUNCATION_TAIL.set(tail_bound)


def record_check(check: str, passed: bool, seconds: float) -> None:
    """Record the outcome and duration of a validation check."""
    CHECK_DURATION.labels(check=check).observe(seconds)
    CHECKS.labels(check=check, status="pass" if passed else "fail").inc()


def render() -> bytes:
    """Return the registry in Prometheus text format."""
    return generate_latest(REGISTRY)


def write(path: Path) -> None:
    """Write the registry to ``path``."""
    path.write_bytes(render())
