"""The algorithmic search space: containers x traversals x layouts x N3L x CSF."""

from __future__ import annotations

from dataclasses import dataclass

LINKED_CELLS = "LC"
VERLET_LISTS = "VL"

LIST_ITER = "List_Iter"
C01 = "C01"
C08 = "C08"
C18 = "C18"
SLI = "SLI"

CELL_TRAVERSALS = (C01, C08, C18, SLI)
CSF_VALUES = (1.0, 0.5)


@dataclass(frozen=True)
class Configuration:
    """One point in the force-backend search space."""

    container: str
    traversal: str
    newton3: bool
    layout: str
    cell_size_factor: float = 1.0

    def __post_init__(self):
        if self.container not in (LINKED_CELLS, VERLET_LISTS):
            raise ValueError(f"unknown container {self.container!r}")
        if self.layout not in ("AoS", "SoA"):
            raise ValueError(f"unknown layout {self.layout!r}")
        if self.container == VERLET_LISTS:
            if self.traversal != LIST_ITER:
                raise ValueError("Verlet lists only support List_Iter")
            if self.cell_size_factor != 1.0:
                raise ValueError("Verlet lists fix the cell size factor at 1")
        else:
            if self.traversal not in CELL_TRAVERSALS:
                raise ValueError(
                    f"linked cells do not support {self.traversal!r}"
                )
        if self.traversal in (LIST_ITER, C01) and self.newton3:
            raise ValueError(f"{self.traversal} cannot use Newton-3 writes")
        if self.cell_size_factor not in CSF_VALUES:
            raise ValueError(
                f"cell size factor must be one of {CSF_VALUES}"
            )

    def __str__(self) -> str:
        n3l = "N3L" if self.newton3 else "NoN3L"
        base = f"{self.container}-{self.traversal}-{n3l}-{self.layout}"
        if self.container == VERLET_LISTS:
            return base
        return f"{base}-CSF{format_csf(self.cell_size_factor)}"

    @property
    def id(self) -> str:
        return str(self)


def format_csf(csf: float) -> str:
    return f"{csf:g}"


def enumerate_configurations() -> list[Configuration]:
    """All valid configurations in a fixed, deterministic order.

    The order is also the tie-break order used by the tuner.
    """
    out = []
    for traversal in CELL_TRAVERSALS:
        n3l_options = (False,) if traversal == C01 else (True, False)
        for newton3 in n3l_options:
            for layout in ("AoS", "SoA"):
                for csf in CSF_VALUES:
                    out.append(Configuration(
                        LINKED_CELLS, traversal, newton3, layout, csf))
    for layout in ("AoS", "SoA"):
        out.append(Configuration(VERLET_LISTS, LIST_ITER, False, layout, 1.0))
    return out


_BY_ID: dict[str, Configuration] = {}


def parse_configuration(text: str) -> Configuration:
    """Parse a configuration string like ``LC-C08-N3L-SoA-CSF1``."""
    if not _BY_ID:
        for c in enumerate_configurations():
            _BY_ID[str(c)] = c
    try:
        return _BY_ID[text.strip()]
    except KeyError:
        raise ValueError(f"unknown configuration {text.strip()!r}") from None


def configuration_index(config: Configuration) -> int:
    """Position of ``config`` in the enumeration order."""
    for i, c in enumerate(enumerate_configurations()):
        if c == config:
            return i
    raise ValueError(f"{config} is not part of the enumerated space")
