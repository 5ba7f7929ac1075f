"""Backend switch for the hot loops.

Every hot kernel exists twice: a vectorised numpy version and a numba
``@njit`` loop version.  The backend is picked once at import from the
``FREEBOUND_BACKEND`` environment variable (``numba`` or ``numpy``); numba
is used by default when it imports cleanly.  ``set_backend`` switches at
runtime, which the tests and the benchmark use to compare both paths.

``FBP_THREADS`` caps the numba worker count.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _initial_backend():
    name = os.environ.get("FREEBOUND_BACKEND", "").strip().lower()
    if name in ("", "auto"):
        return "numba" if HAVE_NUMBA else "numpy"
    if name not in ("numba", "numpy"):
        raise ValueError(f"FREEBOUND_BACKEND must be 'numba' or 'numpy', got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("FREEBOUND_BACKEND=numba but numba is not importable")
    return name


_BACKEND = _initial_backend()

if HAVE_NUMBA:
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # an outdated system TBB only produces a warning; try it last
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    _threads = os.environ.get("FBP_THREADS")
    if _threads:
        numba.set_num_threads(max(1, min(int(_threads), numba.config.NUMBA_NUM_THREADS)))


def backend():
    """Name of the active backend."""
    return _BACKEND


def set_backend(name):
    """Switch between ``"numba"`` and ``"numpy"``; returns the previous name."""
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("numba is not available")
    prev, _BACKEND = _BACKEND, name
    return prev


def njit(*args, **kwargs):
    """``numba.njit`` with on-disk caching, or the identity without numba."""
    kwargs.setdefault("cache", True)
    if not HAVE_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    return numba.njit(*args, **kwargs)


if HAVE_NUMBA:
    prange = numba.prange
else:  # pragma: no cover
    prange = range


def dispatch(numpy_impl, numba_impl):
    """Return a callable that forwards to the implementation of the active backend."""

    def call(*args, **kwargs):
        if _BACKEND == "numba":
            return numba_impl(*args, **kwargs)
        return numpy_impl(*args, **kwargs)

    call.__name__ = numpy_impl.__name__.removesuffix("_np")
    call.__doc__ = numpy_impl.__doc__
    call.numpy = numpy_impl
    call.numba = numba_impl
    return call
