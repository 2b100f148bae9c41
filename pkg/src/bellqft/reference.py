"""Published parameter vectors and correlator values used as reference points.

Rows are stored exactly as tabulated. Two CHSH rows list the radius ``R``
without its decimal point (``501998``, ``707315``); :data:`CHSH_ROWS` keeps
the corrected values ``0.501998`` and ``0.707315`` and flags them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .testfn import BellParameters, ClusterParameters, MerminParameters

__all__ = [
    "ReferenceRow",
    "CHSH_ROWS",
    "LOW_MASS_ROW",
    "MASS_TREND",
    "MERMIN_ROWS",
    "CLUSTER_ROWS",
    "MASSLESS_EXTRAPOLATION",
]


@dataclass(frozen=True)
class ReferenceRow:
    name: str
    params: object
    value: float
    corrected: bool = False


def _bell(a, eta, b, sigma, ap, etap, bp, sigmap, m, R, Rp):
    return BellParameters(a, eta, b, sigma, ap, etap, bp, sigmap, m, R, Rp)


CHSH_ROWS = (
    ReferenceRow(
        "chsh-1",
        _bell(0.0571763, 0.173707, 0.682824, 0.0240641, 3.60771, 0.784553, 0.300806, 1.70987,
              0.300647, 0.501998, 0.799741),
        2.029125,
        corrected=True,
    ),
    ReferenceRow(
        "chsh-2",
        _bell(0.710532, 0.285758, 0.248215, 0.0876402, 0.472765, 2.89372, 3.65721, 3.08397,
              0.000588745, 0.707315, 0.710241),
        2.0660,
        corrected=True,
    ),
    ReferenceRow(
        "chsh-3",
        _bell(0.753259, 0.249479, 0.413562, 0.0140057, 4.97831, 4.43684, 0.898361, 7.15717,
              4.14395e-6, 0.815919, 0.752558),
        2.093229,
    ),
    ReferenceRow(
        "chsh-4",
        _bell(0.495696, 0.180809, 0.471991, 0.087649, 4.0448, 4.4751, 1.9839, 11.1014,
              2.62258e-8, 0.869138, 0.867249),
        2.206017,
    ),
)

LOW_MASS_ROW = ReferenceRow(
    "chsh-low-mass",
    _bell(0.453107, 0.06256, 0.241230, 0.033623, 3.008120, 4.486029, 0.699209, 4.096952,
          0.00939, 1.859616, 0.840575),
    2.06704,
)

# (m, <C>) in order of decreasing mass, with the row supplying the parameters;
# the first mass is listed as 0.0093905 alongside 0.00939 in its parameter row
MASS_TREND = (
    (0.0093905, 2.06704, LOW_MASS_ROW),
    (0.000588745, 2.0660, CHSH_ROWS[1]),
    (4.14395e-6, 2.093229, CHSH_ROWS[2]),
    (2.62258e-8, 2.206017, CHSH_ROWS[3]),
)

MASSLESS_EXTRAPOLATION = 2.79824


def _mermin(a, eta, b, sigma, ap, etap, bp, sigmap, m, R, Rp, p, pp, zeta, zetap):
    return MerminParameters(a, eta, b, sigma, ap, etap, bp, sigmap, m, R, Rp,
                            p=p, p_prime=pp, zeta=zeta, zeta_prime=zetap, d=2 * R, d_prime=2 * R)


MERMIN_ROWS = (
    ReferenceRow("mermin-1", _mermin(0.9465, 0.3055, 0.1312, 0.0749, 2.7175, 2.4143, 7.3920, 9.9823,
                                     0.0898, 1.7299, 2.6952, 0.3337, 1.2638, 0.09370, 0.3913), 2.5458),
    ReferenceRow("mermin-2", _mermin(0.9066, 0.2857, 0.2634, 0.0064, 0.1340, 1.6740, 7.0886, 0.3461,
                                     0.0689, 1.8967, 2.8646, 0.7798, 5.1077, 0.0462, 0.2178), 3.3092),
    ReferenceRow("mermin-3", _mermin(0.3106, 0.0722, 0.1970, 0.0334, 0.6929, 2.1471, 5.6812, 6.1663,
                                     0.0536, 1.8416, 2.5998, 0.6798, 4.3208, 0.0749, 0.0855), 3.3318),
    ReferenceRow("mermin-4", _mermin(0.6489, 0.0485, 0.2419, 0.0737, 4.5423, 3.4910, 4.8776, 9.7773,
                                     0.0339, 1.9304, 2.6174, 0.2551, 0.2830, 0.0987, 0.0135), 3.5607),
)

CLUSTER_ROWS = (
    ReferenceRow("cluster-1", ClusterParameters(0.300835, 0.242515, 0.499921, 0.677292, 1.83324,
                                                0.145679, 3.62183), -0.147295),
    ReferenceRow("cluster-2", ClusterParameters(0.771838, 0.578664, 0.709017, 0.620836, 0.896623,
                                                0.671933, 3.02877), -0.0324423),
    ReferenceRow("cluster-3", ClusterParameters(0.973651, 0.699229, 0.670236, 0.829479, 1.46169,
                                                0.84799, 4.05452), -0.00770447),
    ReferenceRow("cluster-4", ClusterParameters(0.241704, 0.010378, 0.177163, 0.236035, 1.25455,
                                                0.396405, 3.77189), -0.0558507),
)
