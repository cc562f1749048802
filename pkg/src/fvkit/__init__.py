"""fvkit: Feferman–Vaught decompositions and model checking for finite products."""

import sys as _sys

if _sys.getrecursionlimit() < 20000:
    _sys.setrecursionlimit(20000)

__version__ = "0.1.0"
