"""Backend-dispatched entry points for the hot loops."""

import numpy as np

from . import _hot_numba as nb
from . import _hot_numpy as npy
from ._accel import dispatch


def _f(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _wrap_nb(fn):
    # numba wants contiguous float64 arrays and plain scalars
    def call(*args):
        args = [_f(a) if isinstance(a, (np.ndarray, list, tuple)) and np.asarray(a).dtype.kind == "f"
                else a for a in args]
        return fn(*args)

    call.__name__ = fn.__name__
    return call


history_psi = dispatch(npy.history_psi_np, _wrap_nb(nb.history_psi_nb))
space_pl = dispatch(npy.space_pl_np, _wrap_nb(nb.space_pl_nb))
field_history = dispatch(npy.field_history_np, _wrap_nb(nb.field_history_nb))
frontfix = dispatch(npy.frontfix_np, _wrap_nb(nb.frontfix_nb))
