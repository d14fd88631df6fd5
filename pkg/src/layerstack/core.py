"""Declarative scene model and the three-granularity update system.

A scene is a viewport plus an ordered stack of layer specs. Submitting a
new scene never mutates anything in place: the engine diffs the previous
and next specs and refills exactly the invalidated attribute buffers:

* per layer      -- the data reference changed (shallow identity check);
* per attribute  -- an update-trigger value changed for that attribute;
* partial range  -- an explicit contiguous row range was submitted.

Accessor evaluations are instrumented per attribute so the minimality
contract is testable, not aspirational.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import RangeError, SpecError
from .geomath import Viewport, lng_lat_to_world, split_double

_SCALAR_TRIGGER_TYPES = (type(None), bool, int, float, str)


class DataTable:
    """Named equal-length columns plus a reference identity.

    Layer diffing compares tables by identity only: mutating a table in
    place and resubmitting the same object is deliberately ignored, while
    a new object with identical contents refills everything.
    """

    def __init__(self, columns, row_count=None):
        self._columns = {}
        n = row_count
        for name, col in dict(columns).items():
            if isinstance(col, np.ndarray) and col.dtype.kind in "fiu b":
                col = np.asarray(col)
            elif all(isinstance(v, (int, float, np.floating, np.integer)) for v in col):
                col = np.asarray(col, dtype=np.float64)
            else:
                col = list(col)
            if n is None:
                n = len(col)
            elif len(col) != n:
                raise SpecError(f"column {name!r} has length {len(col)}, expected {n}")
            self._columns[name] = col
        self.row_count = int(n or 0)

    def column(self, name):
        if name not in self._columns:
            raise SpecError(f"no column {name!r}; available: {sorted(self._columns)}")
        return self._columns[name]

    def __contains__(self, name):
        return name in self._columns

    @property
    def column_names(self):
        return tuple(self._columns)


def _is_shallow_value(v) -> bool:
    if isinstance(v, _SCALAR_TRIGGER_TYPES):
        return True
    if isinstance(v, tuple):
        return all(isinstance(x, _SCALAR_TRIGGER_TYPES) for x in v)
    return False


def shallow_equal(a, b) -> bool:
    """Identity for opaque objects, value equality for scalars and tuples."""
    if a is b:
        return True
    if _is_shallow_value(a) and _is_shallow_value(b):
        return a == b
    return False


def merge_ranges(ranges, row_count=None):
    """Sort, clip and coalesce [start, end) intervals."""
    out = []
    for s, e in sorted((int(s), int(e)) for s, e in ranges):
        if row_count is not None:
            if s < 0 or e > row_count:
                raise RangeError(f"range [{s}, {e}) outside [0, {row_count})")
        if e <= s:
            continue
        if out and s <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], e))
        else:
            out.append((s, e))
    return tuple(out)


@dataclass(frozen=True)
class PartialUpdate:
    """Explicit range-based refill directive for named attributes."""

    attributes: tuple[str, ...]
    ranges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "ranges", merge_ranges(self.ranges))


@dataclass(frozen=True)
class LayerSpec:
    """What one layer should show. Immutable; equality is field identity."""

    id: str
    type: str
    data: DataTable | None = None
    accessors: dict = field(default_factory=dict)
    props: dict = field(default_factory=dict)
    update_triggers: dict = field(default_factory=dict)
    visible: bool = True
    pickable: bool = False
    partial_update: PartialUpdate | None = None

    def __post_init__(self):
        if not self.id:
            raise SpecError("layer id must be non-empty")
        for k, v in self.update_triggers.items():
            if not _is_shallow_value(v):
                raise SpecError(
                    f"update trigger {k!r} must be a scalar, string or tuple of those; got {type(v).__name__}")
        object.__setattr__(self, "accessors", dict(self.accessors))
        object.__setattr__(self, "props", dict(self.props))
        object.__setattr__(self, "update_triggers", dict(self.update_triggers))


@dataclass(frozen=True)
class SceneSpec:
    viewport: Viewport
    layers: tuple[LayerSpec, ...] = ()

    def __post_init__(self):
        layers = tuple(self.layers)
        ids = [l.id for l in layers]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise SpecError(f"duplicate layer ids: {dup}")
        object.__setattr__(self, "layers", layers)


@dataclass
class ChangeFlags:
    """Everything the update cycle needs to know about one layer diff."""

    data_changed: bool = False
    attributes_to_invalidate: frozenset = frozenset()
    partial_ranges: tuple = ()
    viewport_changed: bool = False
    props_changed: bool = False
    # attributes invalidated only by the partial directive: these refill the
    # listed ranges; trigger- or data-invalidated attributes refill fully
    partial_attributes: frozenset = frozenset()

    @property
    def any(self) -> bool:
        return (self.data_changed or self.props_changed or self.viewport_changed
                or bool(self.attributes_to_invalidate))


def compute_change_flags(prev: LayerSpec, next: LayerSpec, attribute_names=None,
                         viewport_changed=False) -> ChangeFlags:
    """Diff two specs of the same (id, type). No deep comparison anywhere."""
    if (prev.id, prev.type) != (next.id, next.type):
        raise SpecError("change flags require matching layer id and type")
    data_changed = prev.data is not next.data

    invalid = set()
    for name in set(prev.update_triggers) | set(next.update_triggers):
        if not shallow_equal(prev.update_triggers.get(name), next.update_triggers.get(name)):
            invalid.add(name)

    partial_attrs = frozenset()
    partial_ranges = ()
    if next.partial_update is not None and not data_changed:
        partial_attrs = frozenset(next.partial_update.attributes) - invalid
        partial_ranges = next.partial_update.ranges
        invalid |= set(next.partial_update.attributes)

    if data_changed:
        invalid = set(attribute_names) if attribute_names is not None else invalid
        partial_attrs = frozenset()
        partial_ranges = ()

    props_changed = (set(prev.props) != set(next.props)
                     or any(not shallow_equal(prev.props[k], next.props[k]) for k in prev.props))
    return ChangeFlags(
        data_changed=data_changed,
        attributes_to_invalidate=frozenset(invalid),
        partial_ranges=partial_ranges,
        viewport_changed=viewport_changed,
        props_changed=props_changed,
        partial_attributes=partial_attrs,
    )


@dataclass
class ScenePlan:
    creates: tuple[str, ...]
    finalizes: tuple[str, ...]
    updates: dict  # layer id -> ChangeFlags
    order: tuple[str, ...]


def diff_scene(prev: SceneSpec | None, next: SceneSpec, attribute_names_for=None) -> ScenePlan:
    """Match layers by (id, type); unmatched prev finalize, unmatched next create.

    A retained id whose type changed is finalize + create, never an
    in-place morph. ``next``'s layer order is authoritative for drawing.
    """
    prev_layers = {l.id: l for l in (prev.layers if prev else ())}
    next_layers = {l.id: l for l in next.layers}
    viewport_changed = prev is None or prev.viewport != next.viewport

    creates, finalizes, updates = [], [], {}
    for lid, p in prev_layers.items():
        n = next_layers.get(lid)
        if n is None or n.type != p.type:
            finalizes.append(lid)
    for n in next.layers:
        p = prev_layers.get(n.id)
        if p is None or p.type != n.type:
            creates.append(n.id)
        else:
            names = attribute_names_for(n) if attribute_names_for else None
            updates[n.id] = compute_change_flags(p, n, names, viewport_changed)
    return ScenePlan(creates=tuple(creates), finalizes=tuple(finalizes),
                     updates=updates, order=tuple(l.id for l in next.layers))


# ---------------------------------------------------------------------------
# Attribute buffers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AttributeSpec:
    """Schema entry: one per-instance attribute of a layer type."""

    name: str
    components: int
    df64: bool = False
    default: tuple | float | None = None
    required: bool = False


class AttributeBuffer:
    """Packed per-instance float32 values with dirty-range upload tracking.

    df64 buffers keep a paired ``values_lo`` array carrying the trailing
    float32 components of each value.
    """

    def __init__(self, name: str, components: int, instance_count: int, df64: bool = False):
        self.name = name
        self.components = int(components)
        self.instance_count = int(instance_count)
        self.df64 = bool(df64)
        self.values = np.zeros((self.instance_count, self.components), dtype=np.float32)
        self.values_lo = (np.zeros_like(self.values) if df64 else None)
        self.fill_count = 0          # completed full/partial fills
        self._dirty: list = []       # [start, end) rows pending upload

    @property
    def dirty(self) -> bool:
        return bool(self._dirty)

    @property
    def dirty_ranges(self):
        return merge_ranges(self._dirty, self.instance_count)

    def write(self, start: int, values, values_lo=None):
        end = start + len(values)
        if start < 0 or end > self.instance_count:
            raise RangeError(f"write [{start}, {end}) outside instance count {self.instance_count}")
        self.values[start:end] = values
        if self.df64:
            self.values_lo[start:end] = 0.0 if values_lo is None else values_lo
        self._dirty.append((start, end))
        self.fill_count += 1

    def mark_uploaded(self):
        self._dirty.clear()

    @property
    def nbytes_per_instance(self) -> int:
        return self.components * 4 * (2 if self.df64 else 1)


def evaluate_accessor(accessor, table: DataTable, start: int, end: int, components: int):
    """Evaluate an accessor over rows [start, end) -> (end-start, components) float64.

    Accessor forms: column name, sequence of column names, constant
    value/sequence, or a callable row -> value (slow path).
    """
    m = end - start
    if isinstance(accessor, str):
        col = np.asarray(table.column(accessor), dtype=np.float64)[start:end]
        out = col.reshape(m, -1) if col.ndim > 1 else col[:, None]
    elif callable(accessor):
        names = table.column_names
        cols = {k: table.column(k) for k in names}
        out = np.empty((m, components), dtype=np.float64)
        for i in range(m):
            row = {k: cols[k][start + i] for k in names}
            v = accessor(row)
            out[i] = v
    elif isinstance(accessor, (list, tuple)) and accessor and all(isinstance(a, str) for a in accessor):
        cols = [np.asarray(table.column(a), dtype=np.float64)[start:end] for a in accessor]
        out = np.column_stack(cols)
    else:
        const = np.asarray(accessor, dtype=np.float64).reshape(1, -1)
        out = np.broadcast_to(const, (m, const.shape[1]))
    if out.shape[1] == components:
        return out
    if out.shape[1] == 1 and components > 1:
        return np.broadcast_to(out, (m, components))
    if out.shape[1] == 3 and components == 4:  # rgb -> rgba, opaque
        alpha = np.full((m, 1), 255.0)
        return np.concatenate([np.asarray(out), alpha], axis=1)
    raise SpecError(f"accessor produced {out.shape[1]} components, expected {components}")


def fill_attribute(buffer: AttributeBuffer, values: np.ndarray, start: int = 0,
                   world_positions: bool = False, diagnostics=None):
    """Pack evaluated rows into the buffer, splitting df64 positions.

    Rows containing non-finite components are written as all-zeros and
    tallied in ``diagnostics`` rather than aborting the frame.
    """
    values = np.asarray(values, dtype=np.float64)
    bad = ~np.all(np.isfinite(values), axis=1)
    n_bad = int(bad.sum())
    if n_bad:
        values = values.copy()
        values[bad] = 0.0
        if diagnostics is not None:
            diagnostics["nonfinite_rows"] = diagnostics.get("nonfinite_rows", 0) + n_bad
    if buffer.df64:
        hi, lo = split_double(values)
        if n_bad:
            hi[bad] = 0.0
            lo[bad] = 0.0
        buffer.write(start, hi, lo)
    else:
        buffer.write(start, values.astype(np.float32))
    return n_bad


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------

class LayerState:
    """Engine-side state for one live layer."""

    def __init__(self, spec: LayerSpec, build):
        self.spec = spec
        self.build = build  # layers.LayerBuild
        self.buffers: dict[str, AttributeBuffer] = {}
        self.evaluations: dict[str, int] = {}
        self.diagnostics: dict[str, int] = {}

    @property
    def instance_count(self):
        return self.build.instance_count


class Engine:
    """Single-owner scene engine: diff, refill, upload, render.

    ``update`` and ``render`` must be called from one thread at a time.
    """

    def __init__(self, device=None, registry=None):
        from . import gpu, layers  # late import: layers/gpu build on core
        self.device = device if device is not None else gpu.Device()
        self.registry = registry if registry is not None else layers.default_registry()
        self.scene: SceneSpec | None = None
        self.states: dict[str, LayerState] = {}
        self.layer_status: dict[str, str] = {}
        self._frame_serial = 0

    # -- update cycle --------------------------------------------------

    def _attribute_names_for(self, spec: LayerSpec):
        desc = self.registry.get(spec.type)
        return tuple(a.name for a in desc.attributes) if desc else ()

    def update(self, scene: SceneSpec):
        """Apply a new scene spec; refill exactly what the diff invalidates."""
        plan = diff_scene(self.scene, scene, self._attribute_names_for)
        for lid in plan.finalizes:
            self.states.pop(lid, None)
            self.layer_status.pop(lid, None)
        for spec in scene.layers:
            try:
                if spec.id in plan.creates:
                    self._create_layer(spec)
                else:
                    self._update_layer(spec, plan.updates[spec.id])
                self.layer_status[spec.id] = "ok"
            except Exception as exc:  # isolate per layer; scene continues
                self.states.pop(spec.id, None)
                self.layer_status[spec.id] = f"error: {exc}"
        self.scene = scene
        self._frame_serial += 1
        return self.render_layers()

    def _create_layer(self, spec: LayerSpec):
        desc = self.registry.require(spec.type)
        build = desc.build(spec)
        state = LayerState(spec, build)
        for attr in build.attributes:
            state.buffers[attr.name] = AttributeBuffer(
                attr.name, attr.components, build.instance_count, df64=attr.df64)
        self.states[spec.id] = state
        self._fill(state, [a.name for a in build.attributes])
        self._upload(state)

    def _update_layer(self, spec: LayerSpec, flags: ChangeFlags):
        desc = self.registry.require(spec.type)
        state = self.states[spec.id]
        old_spec = state.spec
        state.spec = spec

        structural = flags.data_changed or (
            flags.props_changed and any(
                not shallow_equal(old_spec.props.get(p), spec.props.get(p))
                for p in desc.structural_props))
        if structural:
            build = desc.build(spec)
            rebuilt = build.instance_count != state.build.instance_count
            state.build = build
            if rebuilt:
                for attr in build.attributes:
                    state.buffers[attr.name] = AttributeBuffer(
                        attr.name, attr.components, build.instance_count, df64=attr.df64)
            self._fill(state, [a.name for a in build.attributes])
        elif flags.attributes_to_invalidate:
            full = [a for a in flags.attributes_to_invalidate if a not in flags.partial_attributes]
            self._fill(state, full)
            if flags.partial_attributes:
                self._fill(state, sorted(flags.partial_attributes), ranges=flags.partial_ranges)
        self._upload(state)

    def _fill(self, state: LayerState, attr_names, ranges=None):
        build = state.build
        known = {a.name: a for a in build.attributes}
        for name in attr_names:
            if name not in known:
                continue
            buffer = state.buffers[name]
            spans = merge_ranges(ranges, build.instance_count) if ranges else ((0, build.instance_count),)
            for (s, e) in spans:
                if e <= s:
                    continue
                rows = build.fill(name, state.spec, s, e, state.diagnostics)
                fill_attribute(buffer, rows, start=s,
                               diagnostics=state.diagnostics)
                state.evaluations[name] = state.evaluations.get(name, 0) + (e - s)

    def _upload(self, state: LayerState):
        for buf in state.buffers.values():
            if buf.dirty:
                self.device.upload_buffer(buf)

    # -- render-ready output -------------------------------------------

    def render_layers(self):
        """Layer set in draw order, skipping errored layers."""
        out = []
        if self.scene is None:
            return out
        for index, spec in enumerate(self.scene.layers):
            state = self.states.get(spec.id)
            if state is None:
                continue
            out.append(state.build.render_layer(spec, state, index))
        return out

    def render(self, target, mode="display", background=(0, 0, 0, 0)):
        if self.scene is None:
            raise SpecError("no scene submitted")
        return self.device.render_frame(self.render_layers(), self.scene.viewport,
                                        target, mode=mode, background=background)

    # -- instrumentation ------------------------------------------------

    def evaluations(self, layer_id: str) -> dict:
        state = self.states.get(layer_id)
        return dict(state.evaluations) if state else {}

    def total_evaluations(self, layer_id: str) -> int:
        return sum(self.evaluations(layer_id).values())

    def diagnostics(self, layer_id: str) -> dict:
        state = self.states.get(layer_id)
        return dict(state.diagnostics) if state else {}

    def fill_counts(self, layer_id: str) -> dict:
        state = self.states.get(layer_id)
        return {k: b.fill_count for k, b in state.buffers.items()} if state else {}
