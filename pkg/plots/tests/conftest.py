import subprocess
import sys

import pytest

PRIMARY = [sys.executable, "-m", "votemetrics.cli"]


def run_primary(*args: str) -> None:
    subprocess.run([*PRIMARY, *args], check=True, capture_output=True)


@pytest.fixture(scope="session")
def sweep_csv(tmp_path_factory):
    """A real sweep CSV produced by the primary CLI on generated profiles."""
    base = tmp_path_factory.mktemp("primary")
    corpus = base / "corpus"
    run_primary("generate", "--m", "6", "--alpha", "2.0", "--voters", "300",
                "--profiles", "6", "--seed", "3", "--seats", "3",
                "-o", str(corpus))
    out = base / "sweep.csv"
    run_primary("sweep", str(corpus), "-o", str(out), "--jobs", "1",
                "--rules", "borda,3-approval,2-approval,plurality,stv,optimal-u")
    return out


@pytest.fixture(scope="session")
def experiment_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("primary") / "bt.csv"
    run_primary("bt-experiment", "--m", "5", "--alpha", "2.0", "--voters",
                "200", "--profiles", "5", "--seed", "4", "--seats", "2",
                "--rules", "borda,2-approval,plurality,stv", "-o", str(out))
    return out


@pytest.fixture(scope="session")
def bootstrap_csv(tmp_path_factory):
    base = tmp_path_factory.mktemp("primary")
    corpus = base / "corpus"
    run_primary("generate", "--m", "5", "--alpha", "2.0", "--voters", "200",
                "--profiles", "1", "--seed", "8", "--seats", "2",
                "-o", str(corpus))
    profile = next(corpus.glob("bt_*.csv"))
    out = base / "bootstrap.csv"
    run_primary("bootstrap", str(profile), "--rules", "borda,plurality",
                "--metrics", "sigma_iia,sigma_u", "--resamples", "60",
                "--seed", "2", "-o", str(out))
    return out
