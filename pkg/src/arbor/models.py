"""Built-in amalgam models used by the CLI configs and the test bench."""
from __future__ import annotations

from .groups import Amalgam, cyclic_group, make_amalgam


def dihedral_model() -> Amalgam:
    """C2 * C2 over the trivial group: the infinite dihedral group."""
    H = cyclic_group(2, ["e", "s"])
    K = cyclic_group(2, ["e", "t"])
    C = cyclic_group(1, ["e"])
    return make_amalgam(H, K, C, [0], [0])


def sl2z_model() -> Amalgam:
    """C4 * C6 amalgamated over C2: a, b of orders 4, 6 with a^2 = b^3 central."""
    H = cyclic_group(4, ["e", "a", "a2", "a3"])
    K = cyclic_group(6, ["e", "b", "b2", "b3", "b4", "b5"])
    C = cyclic_group(2, ["e", "z"])
    return make_amalgam(H, K, C, [0, 2], [0, 3])


def psl2z_model() -> Amalgam:
    """C2 * C3 over the trivial group: the modular quotient."""
    H = cyclic_group(2, ["e", "s"])
    K = cyclic_group(3, ["e", "t", "t2"])
    C = cyclic_group(1, ["e"])
    return make_amalgam(H, K, C, [0], [0])


BUILTIN_MODELS = {
    "dihedral": dihedral_model,
    "sl2z": sl2z_model,
    "psl2z": psl2z_model,
}
