import glob
import io
import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from webshell.fixtures import FixtureServer, load_overrides
from webshell.interp import Interp

HERE = os.path.dirname(os.path.abspath(__file__))
SITE = os.path.join(HERE, "site")
OVERRIDES = os.path.join(HERE, "site.overrides")
SCRIPTS = os.path.join(HERE, "scripts")
CORPUS_FILES = sorted(glob.glob(os.path.join(HERE, "corpus", "*.html")))

settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("repo")

# hosts used by the original scripts; redirected to the fixture server
LIVE_HOSTS = ("http://www.cs.cornell.edu", "http://ink.yahoo.com")


def read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def corpus_texts():
    return [read(p) for p in CORPUS_FILES]


def script_source(name, base):
    src = read(os.path.join(SCRIPTS, name))
    for host in LIVE_HOSTS:
        src = src.replace(host, base)
    return src


def run_tcl(source, interp=None):
    """Evaluate ``source``; returns (interp, captured output)."""
    out = io.StringIO()
    if interp is None:
        interp = Interp(out)
    else:
        interp.out = out
    interp.eval_top(source)
    return interp, out.getvalue()


@pytest.fixture(scope="session")
def server():
    with FixtureServer(SITE, load_overrides(OVERRIDES)) as srv:
        yield srv


@pytest.fixture
def srv(server):
    server.reset_log()
    return server


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        verdict, title = results[number]
        terminalreporter.write_line(f"{verdict} {number}: {title}")
