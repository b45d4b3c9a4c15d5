"""Feature extraction: turn raw simulation output into per-window instances.

Every sensor gets one instance per classification window.  Probe-bound
features are the window average/variance of travel time and hop count plus
the lost-probe percentage (five features per probe, for both endpoint
sensors).  Passive features are per-link byte/packet rates for links fully
inside the sensor and per-router MIB counters for member routers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .deploy import ProbeScheme, SensorMap
from .topology import link_name

PROBE_STATS = ("avg_delay", "var_delay", "avg_hop", "var_hop", "pct_lost")
LINK_STATS = ("bytes_per_sec", "pkts_per_sec")
MIB_STATS = ("packets_forwarded", "local_deliveries", "unroutable_packets")

LABEL_NORMAL = "normal"
LABEL_ATTACK = "attack"


class FeatureError(ValueError):
    """Inconsistent feature-extraction input."""


@dataclass(frozen=True)
class FeatureInstance:
    time_unit: int
    values: np.ndarray
    schema: tuple[str, ...]

    def __post_init__(self):
        if len(self.values) != len(self.schema):
            raise FeatureError("instance values do not match schema length")


@dataclass
class Dataset:
    schema: tuple[str, ...]
    time_units: np.ndarray
    values: np.ndarray
    labels: list[str] | None = None

    def __post_init__(self):
        self.time_units = np.asarray(self.time_units, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[1] != len(self.schema):
            raise FeatureError("dataset values shape does not match schema")
        if len(self.time_units) != len(self.values):
            raise FeatureError("time_units length mismatch")
        if np.any(np.diff(self.time_units) <= 0):
            raise FeatureError("time_units must be strictly increasing")
        if self.labels is not None and len(self.labels) != len(self.values):
            raise FeatureError("labels length mismatch")
        if np.isnan(self.values).any():
            raise FeatureError("dataset contains NaN")

    def __len__(self) -> int:
        return len(self.values)

    def instance(self, i: int) -> FeatureInstance:
        return FeatureInstance(int(self.time_units[i]), self.values[i], self.schema)

    def select(self, mask: np.ndarray, with_labels: bool = True) -> "Dataset":
        labels = None
        if with_labels and self.labels is not None:
            labels = [l for l, m in zip(self.labels, mask) if m]
        return Dataset(self.schema, self.time_units[mask], self.values[mask], labels)


def concat_features(datasets: list[Dataset]) -> Dataset:
    """Column-concatenate datasets; rows stay aligned by time unit."""
    if not datasets:
        raise FeatureError("nothing to concatenate")
    first = datasets[0]
    for d in datasets[1:]:
        if not np.array_equal(d.time_units, first.time_units):
            raise FeatureError("datasets are not row-aligned")
    schema = tuple(n for d in datasets for n in d.schema)
    values = np.hstack([d.values for d in datasets])
    labels = next((d.labels for d in datasets if d.labels is not None), None)
    return Dataset(schema, first.time_units.copy(), values, labels)


def _window_count(n_tus: int, tcl_tus: int) -> int:
    return n_tus // tcl_tus


def window_labels(tu_attack_flags: np.ndarray, tcl_tus: int) -> list[str]:
    """A window is 'attack' iff more than half of its TUs are attack TUs."""
    w = _window_count(len(tu_attack_flags), tcl_tus)
    flags = tu_attack_flags[: w * tcl_tus].reshape(w, tcl_tus)
    frac = flags.mean(axis=1)
    return [LABEL_ATTACK if f > 0.5 else LABEL_NORMAL for f in frac]


def probe_window_stats(sim, tcl_tus: int) -> dict[str, np.ndarray]:
    """Per-probe per-window statistics over the raw probe measurements.

    Windows with zero returned probes inherit the previous window's
    avg/var values (0.0 before any data) and report 100% loss.
    """
    travel = sim.probe_travel  # (T, P, S)
    returned = sim.probe_returned  # (T, P, S) bool
    hops = sim.probe_hops  # (T, P)
    n_tus, n_probes, sends = travel.shape
    w = _window_count(n_tus, tcl_tus)
    expected = tcl_tus * sends

    out = {
        name: np.zeros((w, n_probes)) for name in PROBE_STATS
    }
    for p in range(n_probes):
        prev = {"avg_delay": 0.0, "var_delay": 0.0, "avg_hop": 0.0, "var_hop": 0.0}
        for wi in range(w):
            t0, t1 = wi * tcl_tus, (wi + 1) * tcl_tus
            ret = returned[t0:t1, p, :]
            n_ret = int(ret.sum())
            out["pct_lost"][wi, p] = 100.0 * (expected - n_ret) / expected
            if n_ret == 0:
                for k in prev:
                    out[k][wi, p] = prev[k]
                continue
            tt = travel[t0:t1, p, :][ret]
            hh = np.repeat(hops[t0:t1, p], sends).reshape(tcl_tus, sends)[ret]
            prev["avg_delay"] = float(tt.mean())
            prev["var_delay"] = float(tt.var())
            prev["avg_hop"] = float(hh.mean())
            prev["var_hop"] = float(hh.astype(np.float64).var())
            for k in prev:
                out[k][wi, p] = prev[k]
    return out


def build_sensor_instances(
    sim, scheme: ProbeScheme, sensors: SensorMap, tcl_tus: int
) -> dict[str, Dataset]:
    """Probe-feature dataset per sensor (a probe binds to both endpoint sensors)."""
    for p in scheme.probes:
        sensors.sensor_of(p.src)
        sensors.sensor_of(p.dst)
    stats = probe_window_stats(sim, tcl_tus)
    w = _window_count(sim.n_tus, tcl_tus)
    tus = np.arange(w, dtype=np.int64)
    labels = window_labels(sim.labels, tcl_tus)
    out: dict[str, Dataset] = {}
    for s in sensors.sensors:
        members = set(s.members)
        cols: list[np.ndarray] = []
        schema: list[str] = []
        for pi, probe in enumerate(scheme.probes):
            if probe.src in members or probe.dst in members:
                for stat in PROBE_STATS:
                    schema.append(f"probe:{probe.probe_id}:{stat}")
                    cols.append(stats[stat][:, pi])
        values = np.column_stack(cols) if cols else np.zeros((w, 0))
        out[s.sensor_id] = Dataset(tuple(schema), tus, values, list(labels))
    return out


def build_passive_instances(
    sim, sensors: SensorMap, tcl_tus: int, sources=("links", "mibs")
) -> dict[str, dict[str, Dataset]]:
    """Passive-feature datasets per sensor, keyed by source ('links'/'mibs')."""
    w = _window_count(sim.n_tus, tcl_tus)
    tus = np.arange(w, dtype=np.int64)
    labels = window_labels(sim.labels, tcl_tus)

    def window_mean(series: np.ndarray) -> np.ndarray:
        return series[: w * tcl_tus].reshape(w, tcl_tus, -1).mean(axis=1)

    link_bytes = window_mean(sim.link_bytes)
    link_pkts = window_mean(sim.link_pkts)
    fwd = window_mean(sim.router_forwarded)
    local = window_mean(sim.router_local)
    unroutable = window_mean(sim.router_unroutable)

    link_index = {k: i for i, k in enumerate(sim.link_keys)}
    router_index = {r: i for i, r in enumerate(sim.routers)}

    out: dict[str, dict[str, Dataset]] = {}
    for s in sensors.sensors:
        members = set(s.members)
        per_source: dict[str, Dataset] = {}
        if "links" in sources:
            cols, schema = [], []
            for key, li in sorted(link_index.items()):
                if key[0] in members and key[1] in members:
                    schema.append(f"link:{link_name(key)}:bytes_per_sec")
                    cols.append(link_bytes[:, li])
                    schema.append(f"link:{link_name(key)}:pkts_per_sec")
                    cols.append(link_pkts[:, li])
            values = np.column_stack(cols) if cols else np.zeros((w, 0))
            per_source["links"] = Dataset(tuple(schema), tus, values, list(labels))
        if "mibs" in sources:
            cols, schema = [], []
            for r in s.members:
                ri = router_index[r]
                schema.append(f"mib:{r}:packets_forwarded")
                cols.append(fwd[:, ri])
                schema.append(f"mib:{r}:local_deliveries")
                cols.append(local[:, ri])
                schema.append(f"mib:{r}:unroutable_packets")
                cols.append(unroutable[:, ri])
            values = np.column_stack(cols) if cols else np.zeros((w, 0))
            per_source["mibs"] = Dataset(tuple(schema), tus, values, list(labels))
        out[s.sensor_id] = per_source
    return out


def split_train_eval(
    dataset: Dataset,
    attack_windows: list[tuple[int, int]],
    train_end: int,
    benign_windows: list[tuple[int, int]] | None = None,
    include_benign: bool = False,
    attack_fraction: float | None = 2.0 / 3.0,
) -> tuple[Dataset, Dataset]:
    """Split into a normal-only training set and a labeled evaluation set.

    Training rows come from before ``train_end``; rows inside benign windows
    are excluded unless ``include_benign``.  The evaluation set keeps every
    attack row and, when ``attack_fraction`` is given, trims normal rows
    (earliest first) or trailing attack rows to approach the target ratio.
    """
    if dataset.labels is None:
        raise FeatureError("dataset must carry labels for splitting")
    benign_windows = benign_windows or []
    tus = dataset.time_units
    labels = np.array(dataset.labels)

    def in_windows(windows):
        mask = np.zeros(len(tus), dtype=bool)
        for s, e in windows:
            mask |= (tus >= s) & (tus < e)
        return mask

    benign_mask = in_windows(benign_windows)
    train_mask = (tus < train_end) & (labels == LABEL_NORMAL)
    if not include_benign:
        train_mask &= ~benign_mask
    if train_mask.sum() < 20:
        raise FeatureError(
            f"insufficient normal training rows ({int(train_mask.sum())} < 20)"
        )
    train = dataset.select(train_mask, with_labels=False)
    train.labels = None

    eval_mask = tus >= train_end
    eval_ds = dataset.select(eval_mask)
    if attack_fraction is not None and len(attack_windows) > 0:
        ev_labels = np.array(eval_ds.labels)
        attack_idx = np.flatnonzero(ev_labels == LABEL_ATTACK)
        normal_idx = np.flatnonzero(ev_labels == LABEL_NORMAL)
        n_attack, n_normal = len(attack_idx), len(normal_idx)
        if n_attack:
            target_normal = round(n_attack * (1.0 - attack_fraction) / attack_fraction)
            keep = np.ones(len(ev_labels), dtype=bool)
            if n_normal > target_normal:
                keep[normal_idx[: n_normal - target_normal]] = False
            elif n_normal < target_normal:
                target_attack = round(n_normal * attack_fraction / (1.0 - attack_fraction))
                if target_attack < n_attack:
                    keep[attack_idx[target_attack:]] = False
            eval_ds = eval_ds.select(keep)
    return train, eval_ds


def dataset_to_text(dataset: Dataset) -> str:
    out = ["# dataset v1"]
    header = ["time_unit", *dataset.schema]
    if dataset.labels is not None:
        header.append("label")
    out.append("\t".join(header))
    for i in range(len(dataset)):
        row = [str(int(dataset.time_units[i]))]
        row += [repr(float(v)) for v in dataset.values[i]]
        if dataset.labels is not None:
            row.append(dataset.labels[i])
        out.append("\t".join(row))
    return "\n".join(out) + "\n"


def dataset_from_text(text: str) -> Dataset:
    lines = [l for l in text.splitlines() if l and not l.startswith("#")]
    if not lines:
        raise FeatureError("empty dataset file")
    header = lines[0].split("\t")
    has_labels = header[-1] == "label"
    schema = tuple(header[1:-1] if has_labels else header[1:])
    tus, rows, labels = [], [], []
    for line in lines[1:]:
        parts = line.split("\t")
        tus.append(int(parts[0]))
        if has_labels:
            rows.append([float(x) for x in parts[1:-1]])
            labels.append(parts[-1])
        else:
            rows.append([float(x) for x in parts[1:]])
    values = np.array(rows, dtype=np.float64).reshape(len(tus), len(schema))
    return Dataset(schema, np.array(tus), values, labels if has_labels else None)
