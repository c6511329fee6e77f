"""Parametric terrain blocks composed into per-environment arenas.

A track is a list of blocks tiled end-to-end along +x. Each placed block
contributes static wall segments, height regions and named anchors. The
composed Arena is immutable and shareable; all numeric geometry is also
exported as packed float arrays for the physics kernel.

Conventions: the track centerline is y = origin_y; block extents are
(len_x, len_y) with y centered on the centerline. Height regions override
each other in composition order. Walls are vertical segments with a top
height; a body only collides with a wall whose top is above what the body
could step onto.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .config import ConfigError

__all__ = [
    "Flat", "WallWithGate", "Platform", "SeesawBlock", "Bridge",
    "WalledArena", "FootballPitch", "SumoRing",
    "Arena", "SeesawGeom", "compose_track", "height_at", "spawn_layout",
    "VOID_HEIGHT",
]

VOID_HEIGHT = -1e9          # support height outside the arena bounds
WALL_FRICTION = 0.6
PERIMETER_TOP = 3.0


# --------------------------------------------------------------------------
# block specs
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Flat:
    extent: tuple
    name: str = ""


@dataclass(frozen=True)
class WallWithGate:
    gate_width: float
    gate_offset: float
    extent: tuple
    wall_height: float = 1.5
    name: str = ""


@dataclass(frozen=True)
class Platform:
    height: float
    extent: tuple
    face_wall: bool = True
    name: str = ""


@dataclass(frozen=True)
class SeesawBlock:
    half_len: float
    half_width: float
    pivot_height: float
    plank_mass: float = 12.0
    damping: float = 6.0
    name: str = ""

    @property
    def rest_angle(self):
        return math.asin(self.pivot_height / self.half_len)

    @property
    def extent(self):
        # horizontal span of the plank at its angle limits
        return (2.0 * self.half_len * math.cos(self.rest_angle), 4.0)


@dataclass(frozen=True)
class Bridge:
    width: float
    length: float
    deck_height: float
    extent: tuple
    name: str = ""


@dataclass(frozen=True)
class WalledArena:
    extent: tuple
    name: str = ""


@dataclass(frozen=True)
class FootballPitch:
    extent: tuple
    goal_width: float
    goal_depth: float
    name: str = ""


@dataclass(frozen=True)
class SumoRing:
    ring_radius: float
    platform_height: float
    extent: tuple
    name: str = ""


# --------------------------------------------------------------------------
# composed arena
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SeesawGeom:
    pivot: tuple          # (x, y)
    pivot_z: float
    half_len: float
    half_width: float
    angle_limits: tuple   # (lo, hi), symmetric by construction
    init_angle: float
    damping: float
    plank_inertia: float


@dataclass(frozen=True)
class Arena:
    blocks: tuple
    bounds: tuple                       # (x0, y0, x1, y1)
    segments: tuple                     # ((x1, y1, x2, y2, z_top, mu), ...)
    regions: tuple                      # (("rect", x0, y0, x1, y1, h) | ("circle", cx, cy, r, h), ...)
    anchors: dict
    seesaw: SeesawGeom = None
    _packed: dict = field(default_factory=dict, compare=False, repr=False)

    def anchor(self, label):
        try:
            return self.anchors[label]
        except KeyError:
            raise ConfigError(f"arena has no anchor {label!r} "
                              f"(have {sorted(self.anchors)})") from None

    # packed views consumed by the physics kernel --------------------------
    def seg_array(self):
        if "seg" not in self._packed:
            arr = np.array([s for s in self.segments], dtype=np.float64).reshape(-1, 6)
            self._packed["seg"] = np.ascontiguousarray(arr)
        return self._packed["seg"]

    def region_array(self):
        if "reg" not in self._packed:
            rows = []
            for r in self.regions:
                if r[0] == "rect":
                    rows.append((0.0,) + tuple(r[1:]))
                else:  # circle: pad to the rect row width, height last
                    rows.append((1.0, r[1], r[2], r[3], 0.0, r[4]))
            arr = np.array(rows, dtype=np.float64).reshape(-1, 6)
            self._packed["reg"] = np.ascontiguousarray(arr)
        return self._packed["reg"]

    def bounds_array(self):
        if "bounds" not in self._packed:
            self._packed["bounds"] = np.array(self.bounds, dtype=np.float64)
        return self._packed["bounds"]

    def seesaw_array(self):
        """Packed seesaw constants, or zeros with half_len = 0 when absent."""
        if "seesaw" not in self._packed:
            s = self.seesaw
            if s is None:
                arr = np.zeros(9, dtype=np.float64)
            else:
                arr = np.array([s.pivot[0], s.pivot[1], s.pivot_z, s.half_len,
                                s.half_width, s.angle_limits[0], s.angle_limits[1],
                                s.damping, s.plank_inertia], dtype=np.float64)
            self._packed["seesaw"] = arr
        return self._packed["seesaw"]


def compose_track(blocks, track_origin=(0.0, 0.0), perimeter=True):
    """Place blocks end-to-end along +x starting at track_origin.

    Returns the composed Arena. Raises ConfigError for an empty list or
    overlapping extents.
    """
    if not blocks:
        raise ConfigError("compose_track: empty block list")
    ox, oy = float(track_origin[0]), float(track_origin[1])

    segments = []
    regions = []
    anchors = {}
    seesaw = None
    cursor = ox
    half_widths = []
    placed = []

    prev_end = None
    for idx, block in enumerate(blocks):
        ex, ey = block.extent
        if ex <= 0 or ey <= 0:
            raise ConfigError(f"block {idx} ({type(block).__name__}) has "
                              f"non-positive extent {block.extent}")
        x0, x1 = cursor, cursor + ex
        if prev_end is not None and x0 < prev_end - 1e-9:
            raise ConfigError(f"blocks {idx - 1} and {idx} overlap")
        half_widths.append(ey / 2.0)
        world = _BlockFrame(x0, x1, oy - ey / 2.0, oy + ey / 2.0, oy)
        emitted = _emit(block, world)
        prefix = block.name + "." if getattr(block, "name", "") else ""
        for label, pt in emitted.anchors.items():
            key = prefix + label
            if key in anchors:
                key = f"{prefix}{label}_{idx}"
            anchors[key] = pt
        segments.extend(emitted.segments)
        regions.extend(emitted.regions)
        if emitted.seesaw is not None:
            if seesaw is not None:
                raise ConfigError("at most one seesaw block per track")
            seesaw = emitted.seesaw
        placed.append((block, (x0, oy)))
        prev_end = x1
        cursor = x1

    width = 2.0 * max(half_widths)
    bounds = (ox, oy - width / 2.0, cursor, oy + width / 2.0)
    if perimeter:
        bx0, by0, bx1, by1 = bounds
        segments += [
            (bx0, by0, bx1, by0, PERIMETER_TOP, WALL_FRICTION),
            (bx1, by0, bx1, by1, PERIMETER_TOP, WALL_FRICTION),
            (bx1, by1, bx0, by1, PERIMETER_TOP, WALL_FRICTION),
            (bx0, by1, bx0, by0, PERIMETER_TOP, WALL_FRICTION),
        ]

    return Arena(blocks=tuple(placed), bounds=bounds, segments=tuple(segments),
                 regions=tuple(regions), anchors=anchors, seesaw=seesaw)


class _BlockFrame:
    def __init__(self, x0, x1, y0, y1, cy):
        self.x0, self.x1, self.y0, self.y1, self.cy = x0, x1, y0, y1, cy
        self.cx = 0.5 * (x0 + x1)


class _Emitted:
    def __init__(self):
        self.segments = []
        self.regions = []
        self.anchors = {}
        self.seesaw = None


def _emit(block, w):
    out = _Emitted()
    if isinstance(block, Flat) or isinstance(block, WalledArena):
        pass
    elif isinstance(block, WallWithGate):
        gy = w.cy + block.gate_offset
        half = block.gate_width / 2.0
        if not (w.y0 < gy - half and gy + half < w.y1):
            raise ConfigError("gate does not fit inside the wall")
        out.segments.append((w.cx, w.y0, w.cx, gy - half, block.wall_height, WALL_FRICTION))
        out.segments.append((w.cx, gy + half, w.cx, w.y1, block.wall_height, WALL_FRICTION))
        out.anchors["gate_center"] = (w.cx, gy)
    elif isinstance(block, Platform):
        out.regions.append(("rect", w.x0, w.y0, w.x1, w.y1, block.height))
        if block.face_wall:
            out.segments.append((w.x0, w.y0, w.x0, w.y1, block.height, WALL_FRICTION))
        out.anchors["platform_center"] = (w.cx, w.cy)
        out.anchors["platform_edge"] = (w.x0, w.cy)
    elif isinstance(block, SeesawBlock):
        theta = block.rest_angle
        px = w.cx
        inertia = block.plank_mass * (2.0 * block.half_len) ** 2 / 12.0
        out.seesaw = SeesawGeom(
            pivot=(px, w.cy), pivot_z=block.pivot_height,
            half_len=block.half_len, half_width=block.half_width,
            angle_limits=(-theta, theta), init_angle=theta,
            damping=block.damping, plank_inertia=inertia,
        )
        reach = block.half_len * math.cos(theta)
        out.anchors["seesaw_pivot"] = (px, w.cy)
        out.anchors["plank_entry"] = (px - reach, w.cy)
        out.anchors["plank_top"] = (px + reach, w.cy)
    elif isinstance(block, Bridge):
        half = block.width / 2.0
        out.regions.append(("rect", w.x0, w.cy - half, w.x1, w.cy + half,
                            block.deck_height))
        out.anchors["bridge_west"] = (w.x0, w.cy)
        out.anchors["bridge_east"] = (w.x1, w.cy)
    elif isinstance(block, FootballPitch):
        d = block.goal_depth
        half_goal = block.goal_width / 2.0
        gx_w, gx_e = w.x0 + d, w.x1 - d
        top = 1.0
        for gx in (gx_w, gx_e):
            out.segments.append((gx, w.y0, gx, w.cy - half_goal, top, WALL_FRICTION))
            out.segments.append((gx, w.cy + half_goal, gx, w.y1, top, WALL_FRICTION))
        # goal pocket side walls
        for gx, bx in ((gx_w, w.x0), (gx_e, w.x1)):
            out.segments.append((gx, w.cy - half_goal, bx, w.cy - half_goal, top, WALL_FRICTION))
            out.segments.append((gx, w.cy + half_goal, bx, w.cy + half_goal, top, WALL_FRICTION))
        out.anchors["goal_west"] = (gx_w, w.cy)
        out.anchors["goal_east"] = (gx_e, w.cy)
        out.anchors["pitch_center"] = (0.5 * (gx_w + gx_e), w.cy)
    elif isinstance(block, SumoRing):
        out.regions.append(("circle", w.cx, w.cy, block.ring_radius,
                            block.platform_height))
        out.anchors["ring_center"] = (w.cx, w.cy)
    else:
        raise ConfigError(f"unknown block kind {type(block).__name__}")
    return out


# --------------------------------------------------------------------------
# height queries (python mirror of the kernel's terrain logic)
# --------------------------------------------------------------------------

def height_at(arena, x, y, seesaw_angle=None):
    """Support height at (x, y); VOID_HEIGHT outside the arena bounds.

    On the seesaw plank the support is pivot_z + s*sin(angle), s being the
    signed distance along the plank from the pivot.
    """
    x0, y0, x1, y1 = arena.bounds
    if not (x0 <= x <= x1 and y0 <= y <= y1):
        return VOID_HEIGHT
    h = 0.0
    for r in arena.regions:
        if r[0] == "rect":
            _, rx0, ry0, rx1, ry1, rh = r
            if rx0 <= x <= rx1 and ry0 <= y <= ry1:
                h = rh
        else:
            _, cx, cy, rad, rh = r
            if (x - cx) * (x - cx) + (y - cy) * (y - cy) <= rad * rad:
                h = rh
    s = arena.seesaw
    if s is not None:
        ang = s.init_angle if seesaw_angle is None else seesaw_angle
        c = math.cos(ang)
        if c > 1e-9 and abs(y - s.pivot[1]) <= s.half_width:
            along = (x - s.pivot[0]) / c
            if -s.half_len <= along <= s.half_len:
                h = s.pivot_z + along * math.sin(ang)
    return h


# --------------------------------------------------------------------------
# spawn sampling
# --------------------------------------------------------------------------

def spawn_layout(arena, task, rng):
    """Sample initial poses for every spawn group of a task.

    Uniform rejection sampling inside each group's rectangle with the group's
    minimum pairwise separation; after 100 failed tries per entity, fall back
    to a deterministic grid. Identical rng state gives identical layouts.

    Returns {body_index: (x, y, yaw)}.
    """
    poses = {}
    for group in task.spawn_groups:
        placed = []
        gx0, gy0, gx1, gy1 = group.rect
        for ent in group.bodies:
            pt = _try_sample(rng, group.rect, placed, group.min_sep)
            if pt is None:
                pt = _grid_fallback(group.rect, placed, group.min_sep)
            if pt is None:
                raise ConfigError(
                    f"spawn region {group.rect} too small for "
                    f"{len(group.bodies)} bodies at separation {group.min_sep}")
            placed.append(pt)
            poses[ent] = pt + (_draw_yaw(group.yaw, pt, rng),)
    return poses


def _try_sample(rng, rect, placed, min_sep):
    x0, y0, x1, y1 = rect
    for _ in range(100):
        x = x0 + (x1 - x0) * rng.random()
        y = y0 + (y1 - y0) * rng.random()
        if _separated(x, y, placed, min_sep):
            return (x, y)
    return None


def _grid_fallback(rect, placed, min_sep):
    x0, y0, x1, y1 = rect
    w, h = x1 - x0, y1 - y0
    cols = max(1, int(w / min_sep) + 1) if min_sep > 0 else 1
    rows = max(1, int(h / min_sep) + 1) if min_sep > 0 else 1
    for j in range(rows):
        for i in range(cols):
            x = x0 + (w * (i + 0.5) / cols if cols > 1 else w / 2.0)
            y = y0 + (h * (j + 0.5) / rows if rows > 1 else h / 2.0)
            if _separated(x, y, placed, min_sep):
                return (x, y)
    return None


def _separated(x, y, placed, min_sep):
    for px, py in placed:
        dx, dy = x - px, y - py
        if dx * dx + dy * dy < min_sep * min_sep:
            return False
    return True


def _draw_yaw(yaw_spec, pt, rng):
    kind = yaw_spec[0]
    if kind == "fixed":
        return float(yaw_spec[1])
    if kind == "uniform":
        return yaw_spec[1] + (yaw_spec[2] - yaw_spec[1]) * rng.random()
    if kind == "face":
        return math.atan2(yaw_spec[2] - pt[1], yaw_spec[1] - pt[0])
    raise ConfigError(f"unknown yaw spec {yaw_spec!r}")
