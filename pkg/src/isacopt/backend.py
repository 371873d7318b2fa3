"""Numba/numpy backend selection for the hot numeric kernels.

The quadrature inner loop and the Monte Carlo statistic loops dominate
runtime, so they ship in two functionally identical variants: a numba
``@njit`` version and a pure-numpy fallback.  Selection order:

  * ``ISAC_NUMBA=0`` in the environment forces the numpy path;
  * ``ISAC_NUMBA=1`` requires numba (ImportError surfaces if missing);
  * otherwise numba is used when importable.

``ISAC_THREADS`` caps the worker-thread count used by the sweep driver.
"""

import os


def _env_flag(name):
    raw = os.environ.get(name)
    if raw is None:
        return None
    return raw.strip() not in ("0", "false", "False", "no", "")


def numba_enabled() -> bool:
    """Return True when the numba kernel variants should be used."""
    flag = _env_flag("ISAC_NUMBA")
    if flag is False:
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        if flag is True:
            raise
        return False
    return True


def thread_count() -> int:
    """Worker threads for grid evaluation, capped by ISAC_THREADS."""
    cap = os.environ.get("ISAC_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, min(n, 8))


USE_NUMBA = numba_enabled()
