"""Session-scoped fixtures shared by the study and acceptance tests.

The full convergence sweep and the diagnostic suite are expensive, so
they run once per session and every consumer reads the same records.
"""
import time

import pytest

from vemelast import study


@pytest.fixture(scope="session")
def full_study(tmp_path_factory):
    """Records, output directory, and wall time of the default
    convergence sweep (both methods, all families, levels 4..32,
    lambda in {1, 1e4})."""
    out = tmp_path_factory.mktemp("study_full")
    config = study.StudyConfig()
    started = time.perf_counter()
    records = study.run_convergence_study(config, out_dir=str(out))
    wall = time.perf_counter() - started
    return records, out, wall


@pytest.fixture(scope="session")
def diagnostics(tmp_path_factory):
    """Report and output directory of the full diagnostic suite."""
    out = tmp_path_factory.mktemp("diagnostics")
    report = study.run_diagnostics(out_dir=str(out))
    return report, out
