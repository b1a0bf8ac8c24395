import math

from hypothesis import HealthCheck, settings, strategies as st

from cforbit.cfe import ReducedFraction

settings.register_profile(
    "ci",
    derandomize=True,
    max_examples=200,
    suppress_health_check=[HealthCheck.too_slow],
    deadline=None,
)
settings.load_profile("ci")


@st.composite
def reduced_fractions(draw, max_q: int = 3000):
    q = draw(st.integers(min_value=2, max_value=max_q))
    p = draw(st.integers(min_value=1, max_value=q - 1))
    g = math.gcd(p, q)
    p, q = p // g, q // g
    if q == 1:
        p, q = 1, 2
    return ReducedFraction(p, q)
