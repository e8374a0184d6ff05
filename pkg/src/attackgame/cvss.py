"""CVSS v3 exploitability/impact and ASIL-based game parameters."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Mapping

ATTACK_VECTOR = {"N": 0.85, "A": 0.62, "L": 0.55, "P": 0.2}
ATTACK_COMPLEXITY = {"L": 0.77, "H": 0.44}
# scope unchanged
PRIVILEGES_REQUIRED = {"N": 0.85, "L": 0.62, "H": 0.27}
USER_INTERACTION = {"N": 0.85, "R": 0.62}
IMPACT_VALUE = {"H": 0.56, "L": 0.22, "N": 0.0}

EXPLOITABILITY_SCALE = 8.22
IMPACT_SCALE = 6.42


class CvssError(ValueError):
    pass


@dataclass(frozen=True)
class CvssVector:
    av: str
    ac: str
    pr: str
    ui: str
    im_c: str | None = None
    im_i: str | None = None
    im_a: str | None = None

    def __post_init__(self):
        for name, value, table in (
            ("AV", self.av, ATTACK_VECTOR),
            ("AC", self.ac, ATTACK_COMPLEXITY),
            ("PR", self.pr, PRIVILEGES_REQUIRED),
            ("UI", self.ui, USER_INTERACTION),
        ):
            if value not in table:
                raise CvssError(f"invalid {name} value {value!r}; expected one of {sorted(table)}")
        for name, value in (("C", self.im_c), ("I", self.im_i), ("A", self.im_a)):
            if value is not None and value not in IMPACT_VALUE:
                raise CvssError(f"invalid impact {name} value {value!r}")

    @property
    def has_impact(self) -> bool:
        return None not in (self.im_c, self.im_i, self.im_a)

    @classmethod
    def parse(cls, text: str) -> "CvssVector":
        """Parse ``"AV:N/AC:H/PR:L/UI:N[/C:H/I:H/A:H]"``; a ``CVSS:3.x/`` prefix is ignored."""
        fields = {}
        for part in text.strip().split("/"):
            if not part or part.upper().startswith("CVSS:"):
                continue
            key, _, value = part.partition(":")
            fields[key.upper()] = value.upper()
        try:
            return cls(fields["AV"], fields["AC"], fields["PR"], fields["UI"],
                       fields.get("C"), fields.get("I"), fields.get("A"))
        except KeyError as exc:
            raise CvssError(f"vector {text!r} is missing metric {exc.args[0]}") from None

    @classmethod
    def from_dict(cls, d: Mapping[str, str]) -> "CvssVector":
        low = {k.lower(): str(v).upper() for k, v in d.items()}
        alias = {"imc": "im_c", "imi": "im_i", "ima": "im_a", "c": "im_c", "i": "im_i", "a": "im_a"}
        low = {alias.get(k, k): v for k, v in low.items()}
        try:
            return cls(low["av"], low["ac"], low["pr"], low["ui"],
                       low.get("im_c"), low.get("im_i"), low.get("im_a"))
        except KeyError as exc:
            raise CvssError(f"cvss block is missing metric {exc.args[0]}") from None

    def to_dict(self) -> dict:
        d = {"av": self.av, "ac": self.ac, "pr": self.pr, "ui": self.ui}
        if self.has_impact:
            d.update(imc=self.im_c, imi=self.im_i, ima=self.im_a)
        return d


def exploitability(v: CvssVector) -> float:
    """EX = 8.22 * AV * AC * PR * UI, unrounded."""
    return (EXPLOITABILITY_SCALE * ATTACK_VECTOR[v.av] * ATTACK_COMPLEXITY[v.ac]
            * PRIVILEGES_REQUIRED[v.pr] * USER_INTERACTION[v.ui])


def p0_from_exploitability(ex: float) -> float:
    """Baseline breach probability EX/10, clamped to [0, 1]."""
    if ex < 0:
        raise CvssError(f"exploitability must be nonnegative, got {ex}")
    return min(1.0, ex / 10.0)


def p0_from_cvss(v: CvssVector) -> float:
    return p0_from_exploitability(exploitability(v))


def impact(v: CvssVector) -> float:
    if not v.has_impact:
        raise CvssError("impact needs all of ImC, ImI and ImA")
    untouched = 1.0
    for level in (v.im_c, v.im_i, v.im_a):
        untouched *= 1.0 - IMPACT_VALUE[level]
    return IMPACT_SCALE * (1.0 - untouched)


class AsilRating(IntEnum):
    QM = 0
    A = 1
    B = 2
    C = 3
    D = 4

    @classmethod
    def parse(cls, text: str) -> "AsilRating":
        key = str(text).strip().upper()
        if key.startswith("ASIL-"):
            key = key[5:]
        try:
            return cls[key]
        except KeyError:
            raise CvssError(f"unknown ASIL rating {text!r}") from None


# A and B must differ for the table to be strictly increasing; Table-I-style
# losses (1, 10, 50, 100) are hit with QM, B, C, D.
DEFAULT_ASIL_LOSSES: dict[AsilRating, float] = {
    AsilRating.QM: 1.0,
    AsilRating.A: 5.0,
    AsilRating.B: 10.0,
    AsilRating.C: 50.0,
    AsilRating.D: 100.0,
}


def check_asil_mapping(mapping: Mapping[AsilRating, float]) -> None:
    ranked = sorted(mapping.items())
    for (lo, a), (hi, b) in zip(ranked, ranked[1:]):
        if not a < b:
            raise CvssError(f"ASIL loss table must be strictly increasing: "
                            f"{lo.name}={a} vs {hi.name}={b}")
    if any(v < 0 for v in mapping.values()):
        raise CvssError("ASIL losses must be nonnegative")


def parse_asil_mapping(raw: Mapping[str, float]) -> dict[AsilRating, float]:
    mapping = {AsilRating.parse(k): float(v) for k, v in raw.items()}
    check_asil_mapping(mapping)
    return mapping


def loss_from_asil(rating: AsilRating | str,
                   mapping: Mapping[AsilRating, float] | None = None) -> float:
    if mapping is None:
        mapping = DEFAULT_ASIL_LOSSES
    else:
        check_asil_mapping(mapping)
    if not isinstance(rating, AsilRating):
        rating = AsilRating.parse(rating)
    if rating not in mapping:
        raise CvssError(f"ASIL rating {rating.name} is absent from the loss table")
    return float(mapping[rating])
