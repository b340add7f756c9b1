import numpy as np
import pytest

from nearext.distributions import Gaussian, QExponential, Uniform


@pytest.fixture(scope="session")
def parent_specs():
    return [Gaussian(1.0), Gaussian(0.02), QExponential(1.3),
            QExponential(2.0), Uniform(0.0, 1.0), Uniform(-2.0, 3.0)]


def write_returns_tick_file(path, returns, base_price=100.0, start="2007-03-05"):
    """Tick CSV whose tau=1 event returns reproduce ``returns`` exactly.

    One record per price, zero spread, one price change per record, all
    inside a single session day (millisecond steps from 10:00).
    """
    prices = base_price * np.exp(np.concatenate([[0.0], np.cumsum(returns)]))
    n = prices.size
    if n > 20_000_000:
        raise ValueError("too many records for one session day")
    ms = np.arange(n, dtype=np.int64)
    hh = 10 + ms // 3_600_000
    rem = ms % 3_600_000
    mm = rem // 60_000
    rem = rem % 60_000
    ss = rem // 1000
    frac = rem % 1000
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("timestamp,bid,ask,trade_price\n")
        for i in range(n):
            p = "%.17g" % prices[i]
            fh.write(f"{start}T{hh[i]:02d}:{mm[i]:02d}:{ss[i]:02d}."
                     f"{frac[i]:03d},{p},{p},{p}\n")
    return path
