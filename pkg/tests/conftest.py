import os

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from ppt_lab import groups as G

settings.register_profile(
    "default", max_examples=200, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

BS2 = G.BaumslagSolitar(2)
BS3 = G.BaumslagSolitar(3)
F2 = G.FreeGroup(2)
Z2 = G.FreeAbelian(2)

lamp_elements = st.builds(
    lambda s, n: G.LamplighterElement(tuple(sorted(s)), n),
    st.sets(st.integers(-6, 6), max_size=6), st.integers(-6, 6))


def bs_elements(base):
    return st.builds(
        lambda k, num, exp: G.BsElement.make(base, k, num, exp),
        st.integers(-5, 5), st.integers(-40, 40), st.integers(0, 4))


def free_elements(rank=2):
    letters = [i for i in range(-rank, rank + 1) if i]
    return st.lists(st.sampled_from(letters), max_size=10).map(
        lambda w: G.FreeElement.reduce(rank, w))


zn_elements = st.lists(st.integers(-9, 9), min_size=2, max_size=2).map(
    lambda c: G.ZnElement(tuple(c)))

any_element_family = st.sampled_from(["lamplighter", "bs2", "bs3", "free", "zn"])

STRATEGIES = {
    "lamplighter": lamp_elements,
    "bs2": bs_elements(2),
    "bs3": bs_elements(3),
    "free": free_elements(2),
    "zn": zn_elements,
}


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
