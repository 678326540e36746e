"""Clustered object set with tag associations: data model and ingestion.

An instance is a set of objects partitioned into k clusters, a tag
universe, and a per-object subset of tags. All computation downstream
works on dense integer indices fixed by input order; object and tag
identifiers are only used at the I/O boundary.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field


class InstanceError(ValueError):
    """Base class for instance ingestion failures."""


class ParseError(InstanceError):
    """Input does not parse under the declared format."""


class ValidationError(InstanceError):
    """Parsed input violates the instance invariants."""


@dataclass(frozen=True)
class Instance:
    """Immutable clustered object set.

    Attributes:
        objects: object identifiers, in input order.
        tags: tag identifiers, in input order.
        cluster_of: per-object cluster index, 1-based, aligned with `objects`.
        tags_of: per-object frozen set of tag indices into `tags`.
        k: number of clusters; every index in 1..k owns at least one object.
    """

    objects: tuple[str, ...]
    tags: tuple[str, ...]
    cluster_of: tuple[int, ...]
    tags_of: tuple[frozenset[int], ...]
    k: int

    # derived lookups, excluded from equality
    _tag_degrees: tuple[int, ...] = field(init=False, repr=False, compare=False, default=())
    _members: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False, default=())

    def __post_init__(self):
        self._validate()
        degrees = [0] * len(self.tags)
        for ts in self.tags_of:
            for j in ts:
                degrees[j] += 1
        members: list[list[int]] = [[] for _ in range(self.k)]
        for i, c in enumerate(self.cluster_of):
            members[c - 1].append(i)
        object.__setattr__(self, "_tag_degrees", tuple(degrees))
        object.__setattr__(self, "_members", tuple(tuple(m) for m in members))

    def _validate(self):
        if not self.objects:
            raise ValidationError("instance has no objects")
        if len(set(self.objects)) != len(self.objects):
            dupes = sorted({o for o in self.objects if self.objects.count(o) > 1})
            raise ValidationError(f"duplicate object ids: {dupes}")
        if len(set(self.tags)) != len(self.tags):
            raise ValidationError("duplicate tag ids")
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if len(self.cluster_of) != len(self.objects) or len(self.tags_of) != len(self.objects):
            raise ValidationError("cluster_of/tags_of length mismatch with objects")
        seen = set()
        for obj, c in zip(self.objects, self.cluster_of):
            if not 1 <= c <= self.k:
                raise ValidationError(f"object {obj!r} has cluster {c} outside 1..{self.k}")
            seen.add(c)
        if len(seen) != self.k:
            missing = sorted(set(range(1, self.k + 1)) - seen)
            raise ValidationError(f"clusters with no objects: {missing}")
        for obj, ts in zip(self.objects, self.tags_of):
            for j in ts:
                if not 0 <= j < len(self.tags):
                    raise ValidationError(f"object {obj!r} references unknown tag index {j}")

    @property
    def n(self) -> int:
        return len(self.objects)

    @property
    def n_tags(self) -> int:
        return len(self.tags)

    @property
    def cluster_sizes(self) -> tuple[int, ...]:
        return tuple(len(m) for m in self._members)

    def members(self, cluster: int) -> tuple[int, ...]:
        """Object indices of 1-based cluster `cluster`."""
        return self._members[cluster - 1]

    @property
    def tag_index(self) -> dict[str, int]:
        return {t: j for j, t in enumerate(self.tags)}

    @property
    def warnings(self) -> tuple[str, ...]:
        """Diagnostics for objects that can never be covered."""
        return tuple(
            f"object {obj!r} has no tags and can never be covered ({obj} uncoverable)"
            for obj, ts in zip(self.objects, self.tags_of)
            if not ts
        )


def tag_degree(inst: Instance, v: int) -> int:
    """Number of objects associated with tag `v`, over the whole instance."""
    if not 0 <= v < inst.n_tags:
        raise IndexError(f"tag index {v} out of range 0..{inst.n_tags - 1}")
    return inst._tag_degrees[v]


def edge_count(inst: Instance) -> int:
    """Total number of object-tag associations."""
    return sum(len(ts) for ts in inst.tags_of)


def _as_text(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def load_instance(source, format: str = "json") -> Instance:
    """Parse and validate an instance from `source`.

    Args:
        source: bytes, str, or a readable file object.
        format: "json" for the canonical object document, "edge_csv" (or
            "csv") for one association per row.

    Raises:
        ParseError: malformed input for the declared format.
        ValidationError: structurally valid input violating instance rules.
    """
    text = _as_text(source)
    if format == "json":
        return _load_json(text)
    if format in ("edge_csv", "csv"):
        return _load_edge_csv(text)
    raise ValueError(f"unknown format {format!r}")


def _load_json(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ParseError("top-level JSON value must be an object")
    try:
        k = int(doc["k"])
        tags = [str(t) for t in doc["tags"]]
        entries = doc["objects"]
    except (KeyError, TypeError) as e:
        raise ParseError(f"missing or malformed field: {e}") from e
    tag_idx = {t: j for j, t in enumerate(tags)}
    if len(tag_idx) != len(tags):
        raise ValidationError("duplicate tag ids")
    objects, clusters, tag_sets = [], [], []
    for entry in entries:
        try:
            oid = str(entry["id"])
            c = int(entry["cluster"])
            names = entry.get("tags", [])
        except (KeyError, TypeError) as e:
            raise ParseError(f"malformed object entry: {e}") from e
        ts = set()
        for name in names:
            if name not in tag_idx:
                raise ValidationError(f"object {oid!r} uses unknown tag {name!r}")
            ts.add(tag_idx[name])
        objects.append(oid)
        clusters.append(c)
        tag_sets.append(frozenset(ts))
    return Instance(tuple(objects), tuple(tags), tuple(clusters), tuple(tag_sets), k)


def _load_edge_csv(text: str) -> Instance:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty CSV input") from None
    if [h.strip().lower() for h in header] != ["object", "cluster", "tag"]:
        raise ParseError(f"expected header object,cluster,tag, got {header}")
    objects: list[str] = []
    obj_idx: dict[str, int] = {}
    clusters: list[int] = []
    tags: list[str] = []
    tag_idx: dict[str, int] = {}
    tag_sets: list[set[int]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != 3:
            raise ParseError(f"line {lineno}: expected 3 fields, got {len(row)}")
        oid, cs, tag = row[0].strip(), row[1].strip(), row[2].strip()
        try:
            c = int(cs)
        except ValueError:
            raise ParseError(f"line {lineno}: cluster {cs!r} is not an integer") from None
        if oid not in obj_idx:
            obj_idx[oid] = len(objects)
            objects.append(oid)
            clusters.append(c)
            tag_sets.append(set())
        elif clusters[obj_idx[oid]] != c:
            raise ValidationError(f"object {oid!r} listed with clusters "
                                  f"{clusters[obj_idx[oid]]} and {c}")
        if tag:
            if tag not in tag_idx:
                tag_idx[tag] = len(tags)
                tags.append(tag)
            tag_sets[obj_idx[oid]].add(tag_idx[tag])
    k = max(clusters) if clusters else 0
    return Instance(tuple(objects), tuple(tags), tuple(clusters),
                    tuple(frozenset(ts) for ts in tag_sets), k)


def dump_json(inst: Instance) -> str:
    """Canonical JSON emitter; load_instance(dump_json(inst)) == inst."""
    doc = {
        "k": inst.k,
        "tags": list(inst.tags),
        "objects": [
            {
                "id": obj,
                "cluster": c,
                "tags": [inst.tags[j] for j in sorted(ts)],
            }
            for obj, c, ts in zip(inst.objects, inst.cluster_of, inst.tags_of)
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def dump_edge_csv(inst: Instance) -> str:
    """Edge-list emitter. Tag enumeration order is not preserved on reload
    (order of first appearance wins) and degree-zero tags are dropped."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["object", "cluster", "tag"])
    for obj, c, ts in zip(inst.objects, inst.cluster_of, inst.tags_of):
        if not ts:
            writer.writerow([obj, c, ""])
        for j in sorted(ts):
            writer.writerow([obj, c, inst.tags[j]])
    return out.getvalue()
