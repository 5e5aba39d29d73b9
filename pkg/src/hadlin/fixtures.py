"""Shipped fixtures: the two notable k=4 gadgets, the k=4 construction
restriction list, and the published curve table.

Pair strings below are the published table rows; they are canonicalized on
load (our orbit representatives differ from the published ones; sizes,
distances and weights are orbit invariants, so nothing else changes).
"""

from importlib import resources

from . import orbits
from .boolfn import BoolFn
from .gadget import Gadget
from .rational import Rat

# (f1, f2, per-edge capacity) rows of the minimal-completeness gadget
# attaining the best (1 - rs)/(1 - c); c = 9939/10768.
TAB_RSOUND = [
    ("1100000000000000", "1110000000000000", Rat(5461, 969636864)),
    ("1110000000000000", "1111000000000000", Rat(17007, 1616061440)),
    ("1110000000000000", "1110100000000000", Rat(437, 404015360)),
    ("1110100000000000", "1110100010000000", Rat(19, 92346368)),
    ("0000000000000000", "1100000000000000", Rat(13, 215360)),
]

# Same for the infinity-relaxed objective; c = 590174949/639271832.
TAB_RSOUNDINF = [
    ("1100000000000000", "1110000000000000", Rat(4899, 799089790)),
    ("1110000000000000", "1111000000000000", Rat(11843, 799089790)),
    ("1110000000000000", "1110100000000000", Rat(1427, 1917815496)),
    ("1110100000000000", "1110100010000000", Rat(1427, 19178154960)),
    ("0000000000000000", "1100000000000000", Rat(6094929, 102283493120)),
]

# Every edge orbit that ever carried weight in a constructed k=4 gadget; used
# as the restriction list for k=4 construction below full completeness.
RESTRICTION_K4 = [
    ("0000000000000000", "1000000000000000"),
    ("1000000000000000", "1100000000000000"),
    ("1100000000000000", "1110000000000000"),
    ("1110000000000000", "1111000000000000"),
    ("1110000000000000", "1110100000000000"),
    ("1110100000000000", "1110100010000000"),
    ("0000000000000000", "1100000000000000"),
    ("1100000000000000", "1111000000000000"),
    ("1100000000000000", "1110100000000000"),
    ("1110000000000000", "1111100000000000"),
    ("1110000000000000", "1110110000000000"),
    ("1111000000000000", "1110100000000000"),
    ("1110100000000000", "1110100011000000"),
    ("0000000000000000", "1110000000000000"),
    ("1100000000000000", "1111100000000000"),
    ("1100000000000000", "1110101000000000"),
    ("1110000000000000", "1110100010001000"),
    ("0000000000000000", "1111000000000000"),
    ("0000000000000000", "1110100000000000"),
    ("0000000000000000", "1111100000000000"),
    ("0000000000000000", "1111111100000000"),
]

# size and raw Hamming distance columns of the published orbit tables
PUBLISHED_ORBITS_K2 = [("0000", "1000", 1, 32), ("0000", "1100", 2, 24)]
PUBLISHED_ORBITS_K3 = [
    ("00000000", "10000000", 1, 128),
    ("10000000", "11000000", 1, 896),
    ("00000000", "11000000", 2, 448),
    ("00000000", "11110000", 4, 112),
]
PUBLISHED_ORBITS_K4 = [
    ("0000000000000000", "1000000000000000", 1, 512),
    ("1000000000000000", "1100000000000000", 1, 7680),
    ("1100000000000000", "1110000000000000", 1, 53760),
    ("1110000000000000", "1111000000000000", 1, 17920),
    ("1110000000000000", "1110100000000000", 1, 215040),
    ("1110100000000000", "1110100010000000", 1, 215040),
    ("0000000000000000", "1100000000000000", 2, 3840),
    ("1100000000000000", "1111000000000000", 2, 26880),
    ("1100000000000000", "1110100000000000", 2, 322560),
    ("1110000000000000", "1111100000000000", 2, 107520),
    ("1110000000000000", "1110110000000000", 2, 161280),
    ("1111000000000000", "1110100000000000", 2, 107520),
    ("1110100000000000", "1110100011000000", 2, 322560),
    ("0000000000000000", "1110000000000000", 3, 17920),
    ("1100000000000000", "1111100000000000", 3, 322560),
    ("1100000000000000", "1110101000000000", 3, 215040),
    ("1110000000000000", "1110100010001000", 3, 860160),
    ("0000000000000000", "1111000000000000", 4, 4480),
    ("0000000000000000", "1110100000000000", 4, 53760),
    ("0000000000000000", "1111100000000000", 5, 53760),
    ("0000000000000000", "1111111100000000", 8, 480),
]

# Expected evaluation results of the two fixtures
RSOUND_COMPLETENESS = Rat(9939, 10768)
RSOUND_RS = Rat(2623643487, 2955083776)
RSOUNDINF_COMPLETENESS = Rat(590174949, 639271832)
RSOUNDINF_RSINF = Rat(141533171, 159817958)
DELETION_RATIO = Rat(73139148, 49096883)
WIMAN_RS = Rat(3308625759, 3640066048)


def orbit_id_of_pair(k: int, s1: str, s2: str) -> int:
    m1 = BoolFn.from_string(s1, k).mask
    m2 = BoolFn.from_string(s2, k).mask
    return orbits.edge_orbit_of(k, m1, m2)


def gadget_from_rows(k: int, rows) -> Gadget:
    weights = {}
    for s1, s2, w in rows:
        oid = orbit_id_of_pair(k, s1, s2)
        weights[oid] = weights.get(oid, Rat(0)) + Rat(w)
    return Gadget.from_weights(k, weights)


def tab_rsound_gadget() -> Gadget:
    return gadget_from_rows(4, TAB_RSOUND)


def tab_rsoundinf_gadget() -> Gadget:
    return gadget_from_rows(4, TAB_RSOUNDINF)


def restriction_orbits(k: int) -> list:
    if k != 4:
        raise ValueError("the shipped restriction list is for k = 4")
    return sorted({orbit_id_of_pair(4, s1, s2) for s1, s2 in RESTRICTION_K4})


def fixture_path(name: str):
    return resources.files("hadlin").joinpath("fixtures", name)


def fixture_text(name: str) -> str:
    return fixture_path(name).read_text()
