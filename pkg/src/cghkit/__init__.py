"""Desk-scale computer-generated holography on the CPU.

Layers, bottom to top: ``kernels`` (compiled or pure incremental-update
core), ``propagation`` (unitary transforms and metrics), ``slm``/``image``
(device models and field utilities), ``algorithms`` (the four generators),
``hierarchy``/``schema`` (typed parameter tree), ``serialio`` (parameter
files, ``.hgi`` field containers, PNG, CSV), ``controller`` (run and batch
orchestration) and ``cli``.
"""

__version__ = "0.1.0"
