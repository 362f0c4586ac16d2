import re
from dataclasses import dataclass

TOTAL_GPCS = 7

# shape -> (GPCs, DRAM GB, max instances on one A100-style GPU)
MIG_SHAPES = {
    "1g.5gb": (1, 5, 7),
    "2g.10gb": (2, 10, 3),
    "3g.20gb": (3, 20, 2),
    "4g.20gb": (4, 20, 1),
    "7g.40gb": (7, 40, 1),
}

_NOTATION = re.compile(r"^\s*(\d+)g\.(\d+)gb(?:\((\d+)x\))?\s*$")


@dataclass(frozen=True)
class VGpuShape:
    gpc_count: int
    dram_gb: int

    @property
    def notation(self) -> str:
        return f"{self.gpc_count}g.{self.dram_gb}gb"

    @classmethod
    def from_notation(cls, notation: str) -> "VGpuShape":
        match = _NOTATION.match(notation)
        if match is None:
            raise ValueError(f"bad MIG shape {notation!r}; expected 'Mg.Ngb'")
        return cls(int(match.group(1)), int(match.group(2)))


@dataclass(frozen=True)
class MigConfig:
    """V homogeneous vGPUs of one shape."""
    vgpu_count: int
    shape: VGpuShape = VGpuShape(1, 5)

    def __post_init__(self):
        if not 1 <= self.vgpu_count <= TOTAL_GPCS:
            raise ValueError(f"vgpu_count must be in 1..{TOTAL_GPCS}, got {self.vgpu_count}")
        if self.vgpu_count * self.shape.gpc_count > TOTAL_GPCS:
            raise ValueError(f"{self.vgpu_count} x {self.shape.notation} needs "
                             f"{self.vgpu_count * self.shape.gpc_count} GPCs, only {TOTAL_GPCS} exist")

    @property
    def notation(self) -> str:
        return f"{self.shape.notation}({self.vgpu_count}x)"

    def with_vgpus(self, vgpu_count: int) -> "MigConfig":
        return MigConfig(vgpu_count=vgpu_count, shape=self.shape)

    @classmethod
    def preset(cls, shape: str, vgpu_count: int = None) -> "MigConfig":
        if shape not in MIG_SHAPES:
            raise ValueError(f"unknown MIG shape {shape!r}; known: {list(MIG_SHAPES)}")
        gpcs, dram, max_count = MIG_SHAPES[shape]
        return cls(vgpu_count=max_count if vgpu_count is None else vgpu_count, shape=VGpuShape(gpcs, dram))


def parse_mig_notation(notation: str) -> MigConfig:
    """'1g.5gb(7x)' -> MigConfig(7, 1g.5gb). Without '(Vx)' the shape's maximum count is used."""
    match = _NOTATION.match(notation)
    if match is None:
        raise ValueError(f"bad MIG notation {notation!r}; expected 'Mg.Ngb(Vx)'")
    shape = VGpuShape(int(match.group(1)), int(match.group(2)))
    if match.group(3) is not None:
        count = int(match.group(3))
    else:
        count = MIG_SHAPES.get(shape.notation, (0, 0, TOTAL_GPCS // shape.gpc_count))[2]
    return MigConfig(vgpu_count=count, shape=shape)
