"""Mermin-Peres square strategies in a two-agent decentralized POMDP.

Classical strategies, even with unlimited common randomness, are held below
``1 - 2 delta`` long-run average reward when every transition has probability
above ``delta``; two fresh Bell pairs per step let the agents reach 1.
"""

from ._accel import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
