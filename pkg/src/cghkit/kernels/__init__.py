"""Hot inner-loop kernels with a compiled core and a pure NumPy fallback.

The annealing and binary-search loops spend nearly all of their time
evaluating the masked error change of a single-pixel hologram update.
Three kernels cover that work; both backends implement the same contract:

``delta_error(replay_m, target_m, row_tw, col_tw, mu, mv, delta)``
    Error-sum change ``sum((|R'| - t)^2 - (|R| - t)^2)`` over the masked
    replay samples if the pixel changed by ``delta``, without committing.
``commit_update(replay_m, row_tw, col_tw, mu, mv, delta)``
    Apply the update to the masked replay samples in place.
``best_delta(replay_m, target_m, row_tw, col_tw, mu, mv, deltas)``
    Index and error change of the best candidate in ``deltas`` (zero
    deltas are skipped; ties keep the lowest index); ``(-1, 0.0)`` when
    nothing improves.

``replay_m``/``target_m`` are the uncentered replay and target amplitude
gathered at the mask indices ``(mu, mv)``; ``row_tw``/``col_tw`` are the
changed pixel's rows of the DFT twiddle tables, with the unitary scale
folded into the column table.

The compiled backend is preferred; set ``CGHKIT_PURE=1`` to force the
fallback. ``benchmarks/bench_kernels.py`` compares the two.
"""

import os

from . import _pure

if os.environ.get("CGHKIT_PURE"):
    impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _core as impl

        BACKEND = "compiled"
    except ImportError:
        impl = _pure
        BACKEND = "pure"

delta_error = impl.delta_error
commit_update = impl.commit_update
best_delta = impl.best_delta


def available_backends():
    """Name -> module for every importable backend (for tests and benchmarks)."""
    backends = {"pure": _pure}
    try:
        from . import _core

        backends["compiled"] = _core
    except ImportError:
        pass
    return backends
