"""Feature meanings and contrastive sentence rendering.

This is the layer that makes the identical search output read as an
explanation (named tabular features) or expose a non-sequitur (per-pixel
"features"). Rendering is a pure function of its inputs: equal inputs
give byte-identical text.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ParseError, ShapeError

FEATURE_KINDS = ("continuous", "integer-valued")
STYLES = ("plain-english", "formal-template", "hidden-unit")
PROVENANCES = ("human-assigned", "exemplar-derived")

IDENTITY_TEMPLATE = "No change was required: the decision was already {to}."


@dataclass(frozen=True)
class FeatureEntry:
    """Display metadata for one input dimension.

    ``unit`` is a literal prefix ("£"); ``short_name`` is the wording used
    on second mention (defaults to the name itself).
    """

    name: str
    unit: str = ""
    kind: str = "continuous"
    precision: int = 2
    mutable: bool = True
    short_name: str | None = None

    def __post_init__(self):
        if not self.name:
            raise ParameterError("feature name must be nonempty")
        if self.kind not in FEATURE_KINDS:
            raise ParameterError(f"unknown feature kind {self.kind!r}")
        if self.precision < 0:
            raise ParameterError("display precision must be nonnegative")
        if self.short_name is None:
            object.__setattr__(self, "short_name", self.name)

    def format_value(self, value) -> str:
        digits = 0 if self.kind == "integer-valued" else self.precision
        return f"{float(value):,.{digits}f}"


@dataclass(frozen=True, eq=False)
class FeatureCatalog:
    """Per-dimension entries plus the per-class decision phrases."""

    features: tuple
    decisions: tuple

    def __post_init__(self):
        features = tuple(self.features)
        decisions = tuple(str(d) for d in self.decisions)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "decisions", decisions)
        names = [f.name for f in features]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ParameterError(f"duplicate feature names: {dupes}")
        if not features:
            raise ShapeError("catalog needs at least one feature")
        if not decisions:
            raise ShapeError("catalog needs decision labels")

    @property
    def width(self):
        return len(self.features)

    def entry(self, name) -> FeatureEntry:
        for f in self.features:
            if f.name == name:
                return f
        raise KeyError(f"feature {name!r} not in catalog")

    def decision(self, class_index) -> str:
        if not 0 <= class_index < len(self.decisions):
            raise IndexError(f"class index {class_index} out of range")
        return self.decisions[class_index]

    def to_json(self):
        return {
            "features": [
                {
                    "name": f.name,
                    "unit": f.unit,
                    "kind": f.kind,
                    "precision": f.precision,
                    "mutable": f.mutable,
                    "short_name": f.short_name,
                }
                for f in self.features
            ],
            "decisions": list(self.decisions),
        }

    @classmethod
    def from_json(cls, doc):
        try:
            features = tuple(
                FeatureEntry(
                    name=entry["name"],
                    unit=entry.get("unit", "") or "",
                    kind=entry.get("kind", "continuous"),
                    precision=int(entry.get("precision", 2)),
                    mutable=bool(entry.get("mutable", True)),
                    short_name=entry.get("short_name"),
                )
                for entry in doc["features"]
            )
            return cls(features=features, decisions=tuple(doc["decisions"]))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed catalog: {exc}") from exc


def save_catalog(catalog: FeatureCatalog, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(catalog.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_catalog(path) -> FeatureCatalog:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        raise ParseError(f"{path}: empty catalog file")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    return FeatureCatalog.from_json(doc)


@dataclass(frozen=True)
class UnitAnnotation:
    """Human- or exemplar-derived gloss for one hidden unit."""

    layer: int
    unit: int
    gloss: str
    provenance: str = "human-assigned"

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ParameterError(f"unknown provenance {self.provenance!r}")


def save_annotations(annotations, path):
    doc = [
        {"layer": a.layer, "unit": a.unit, "gloss": a.gloss, "provenance": a.provenance}
        for a in annotations
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_annotations(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    try:
        return tuple(
            UnitAnnotation(
                layer=int(a["layer"]),
                unit=int(a["unit"]),
                gloss=str(a["gloss"]),
                provenance=a.get("provenance", "human-assigned"),
            )
            for a in doc
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"{path}: malformed annotation ({exc})") from exc


@dataclass(frozen=True, eq=False)
class Explanation:
    """Rendered contrastive statement plus the data it was built from."""

    style: str
    changed: tuple  # (name, old value, new value)
    from_label: str
    to_label: str
    text: str
    score_from: float | None = None
    score_to: float | None = None

    def to_json(self):
        return {
            "style": self.style,
            "changed": [[n, float(o), float(v)] for n, o, v in self.changed],
            "from_label": self.from_label,
            "to_label": self.to_label,
            "score_from": self.score_from,
            "score_to": self.score_to,
            "text": self.text,
        }


def feature_diff(x, x_prime, catalog: FeatureCatalog, tau=1e-6):
    """Changed features, largest |change| first (ties by index).

    Raw values are returned; display rounding happens at render time.
    """
    x = np.asarray(x, dtype=np.float64)
    x_prime = np.asarray(x_prime, dtype=np.float64)
    if x.shape != x_prime.shape or x.shape[0] != catalog.width:
        raise ShapeError(
            f"diff needs two vectors of catalog width {catalog.width}"
        )
    delta = np.abs(x_prime - x)
    idx = np.nonzero(delta > tau)[0]
    order = idx[np.lexsort((idx, -delta[idx]))]
    return tuple(
        (catalog.features[j].name, float(x[j]), float(x_prime[j])) for j in order
    )


def _score_text(value) -> str:
    return format(float(value), "g")


def render_counterfactual(diff, catalog: FeatureCatalog, from_class, to_class,
                          style="plain-english", score_from=None,
                          score_to=None) -> Explanation:
    """Render a feature diff as a contrastive sentence.

    plain-english: "You were {denied} because your {name} was {unit}{old}.
    If your {short name} had been {unit}{new}, you would have been {offered}."
    Multi-feature diffs join their clauses with "and". formal-template
    instantiates the score/variables wording and requires both scores.
    """
    if style not in ("plain-english", "formal-template"):
        raise ParameterError(f"unknown counterfactual style {style!r}")
    from_label = catalog.decision(int(from_class))
    to_label = catalog.decision(int(to_class))
    diff = tuple((str(n), float(o), float(v)) for n, o, v in diff)
    if not diff:
        text = IDENTITY_TEMPLATE.format(to=to_label)
        return Explanation(
            style=style, changed=(), from_label=from_label, to_label=to_label,
            text=text, score_from=score_from, score_to=score_to,
        )
    entries = [catalog.entry(name) for name, _, _ in diff]
    if style == "plain-english":
        was = " and ".join(
            f"your {e.name} was {e.unit}{e.format_value(old)}"
            for e, (_, old, _) in zip(entries, diff)
        )
        would = " and ".join(
            f"your {e.short_name} had been {e.unit}{e.format_value(new)}"
            for e, (_, _, new) in zip(entries, diff)
        )
        text = (
            f"You were {from_label} because {was}. "
            f"If {would}, you would have been {to_label}."
        )
        return Explanation(
            style=style, changed=diff, from_label=from_label,
            to_label=to_label, text=text,
        )
    if score_from is None or score_to is None:
        raise ParameterError("formal-template needs score_from and score_to")
    names = ", ".join(e.name for e in entries)
    olds = ", ".join(
        f"{e.unit}{e.format_value(old)}" for e, (_, old, _) in zip(entries, diff)
    )
    news = ", ".join(
        f"{e.unit}{e.format_value(new)}" for e, (_, _, new) in zip(entries, diff)
    )
    text = (
        f"Score {_score_text(score_from)} was returned because variables "
        f"({names}) had values ({olds}) associated with them. "
        f"If ({names}) instead had values ({news}), and all other variables "
        f"had remained constant, score {_score_text(score_to)} would have "
        f"been returned."
    )
    return Explanation(
        style="formal-template", changed=diff, from_label=from_label,
        to_label=to_label, text=text,
        score_from=float(score_from), score_to=float(score_to),
    )


def render_hidden_counterfactual(deltas, annotations, from_label, to_label,
                                 layer=None, subject="input image") -> Explanation:
    """Render hidden-unit activation edits as contrastive sentences.

    Each delta becomes: 'The {subject} was labelled "{from}" because hidden
    neuron {unit}, which generally activates for {gloss}, had an activation
    of {old}. If hidden neuron {unit} had an activation of {new} the
    {subject} would have been labelled "{to}".' The gloss clause appears
    only when an annotation matches the unit.
    """
    from_label = str(from_label)
    to_label = str(to_label)
    deltas = tuple((int(u), float(o), float(n)) for u, o, n in deltas)
    if not deltas:
        text = IDENTITY_TEMPLATE.format(to=to_label)
        return Explanation(
            style="hidden-unit", changed=(), from_label=from_label,
            to_label=to_label, text=text,
        )
    gloss_by_unit = {}
    for a in annotations or ():
        if layer is None or a.layer == layer:
            gloss_by_unit.setdefault(a.unit, a.gloss)
    sentences = []
    for unit, old, new in deltas:
        gloss = gloss_by_unit.get(unit)
        clause = f", which generally activates for {gloss}," if gloss else ""
        sentences.append(
            f'The {subject} was labelled "{from_label}" because hidden neuron '
            f"{unit}{clause} had an activation of {_score_text(old)}. "
            f"If hidden neuron {unit} had an activation of {_score_text(new)} "
            f'the {subject} would have been labelled "{to_label}".'
        )
    changed = tuple((f"hidden neuron {u}", o, n) for u, o, n in deltas)
    return Explanation(
        style="hidden-unit", changed=changed, from_label=from_label,
        to_label=to_label, text=" ".join(sentences),
    )
