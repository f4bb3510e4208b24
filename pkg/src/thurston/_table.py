"""Published reference coefficients for the batch comparison command.

Each row pins a combinatorics, the step being compared (None means the
converged limit), the reference coefficients in ascending powers (decimal
strings), the reference fit error, and the reference iteration count.

The degree-7 row is flagged: its reference linear coefficient fails the
framing constraint (the printed coefficients sum to -19 where the framing
forces the sum to be exactly 1, so a leading digit was evidently lost in
typesetting); recomputation gives 20.2055707... and restores the sum.
"""

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class ReferenceRow:
    key: str
    combinatorics: str
    step: Optional[int]  # None: compare the converged limit
    coefficients: tuple  # decimal strings, ascending powers incl. constant
    error: str
    iterations: int
    run_tol: str  # tolerance used for our comparison run
    note: str = ""


ROWS = (
    ReferenceRow(
        key="cubic-period4",
        combinatorics="0,4,3,1,2,5",
        step=None,
        coefficients=("0", "7.121692805", "-17.64597623", "11.52428342"),
        error="1.24e-8",
        iterations=20,
        run_tol="1e-9",
    ),
    ReferenceRow(
        key="quintic step 1",
        combinatorics="0,2,6^2,4,3^3,1^2,4,7",
        step=1,
        coefficients=("0", "15.332055", "-92.795911", "225.00679", "-242.71367", "96.170733"),
        error="0.037",
        iterations=1,
        run_tol="1e-9",
    ),
    ReferenceRow(
        key="quintic step 2",
        combinatorics="0,2,6^2,4,3^3,1^2,4,7",
        step=2,
        coefficients=("0", "18.069912", "-112.83091", "273.38011", "-292.41971", "114.80059"),
        error="0.0038",
        iterations=2,
        run_tol="1e-9",
    ),
    ReferenceRow(
        key="quintic limit",
        combinatorics="0,2,6^2,4,3^3,1^2,4,7",
        step=None,
        coefficients=("0", "18.163069", "-113.72167", "276.22221", "-296.09149", "116.42789"),
        error="1.84e-6",
        iterations=13,
        run_tol="1e-9",
    ),
    ReferenceRow(
        key="cubic exact",
        combinatorics="0,3,2,1,4",
        step=None,
        coefficients=("0", "6", "-15", "10"),
        error="1e-13",
        iterations=14,
        run_tol="1e-13",
    ),
    ReferenceRow(
        key="degree 7",
        combinatorics="0,3^4,2^3,1,4",
        step=None,
        coefficients=(
            "0", "0.20557075", "-181.7478872", "855.1404749", "-2244.547436",
            "3255.216137", "-2427.230116", "723.9632564",
        ),
        error="4.13e-8",
        iterations=18,
        run_tol="1e-9",
        note=(
            "framing-inconsistent in source: reference coefficients sum to -19 "
            "instead of 1; the linear coefficient recomputes to 20.2055707..."
        ),
    ),
    ReferenceRow(
        key="degree-5 step 1",
        combinatorics="6,2^4,3,4,5,1,0",
        step=1,
        coefficients=("1", "-8.73730", "44.7494", "-110.928", "130.960", "-57.0449"),
        error="0.0791",
        iterations=1,
        run_tol="0.0021",
    ),
    ReferenceRow(
        key="degree-5 step 2",
        combinatorics="6,2^4,3,4,5,1,0",
        step=2,
        coefficients=("1", "-5.10905", "28.0816", "-74.57010", "93.9995", "-43.4011"),
        error="0.0144",
        iterations=2,
        run_tol="0.0021",
    ),
    ReferenceRow(
        key="degree-5 step 3",
        combinatorics="6,2^4,3,4,5,1,0",
        step=3,
        coefficients=("1", "-5.82395", "31.5803", "-82.7518", "102.974", "-46.9785"),
        error="0.0021",
        iterations=3,
        run_tol="0.0021",
    ),
    ReferenceRow(
        key="degree 6",
        combinatorics="0,2,1,3,5,3^3,0",
        step=None,
        coefficients=(
            "0", "7.494214522", "-97.01797994", "457.9211574", "-913.0123135",
            "811.6279094", "-267.0129879",
        ),
        error="3.54e-9",
        iterations=25,
        run_tol="1e-9",
    ),
    ReferenceRow(
        key="collapse quartic",
        combinatorics="0,4,3,2,1,2,0",
        step=None,
        coefficients=("0", "7.45977893", "-32.0733758", "47.0904007", "-22.4768041"),
        error="5.49e-9",
        iterations=36,
        run_tol="1e-10",
        note="non-expansive edge [2,3]; limit realizes 0,3,2,1,2,0",
    ),
    ReferenceRow(
        key="collapse sextic",
        combinatorics="0,1,5,0,2,1,7,1,0",
        step=None,
        coefficients=(
            "0", "20.15184092", "-208.9317665", "827.5262978", "-1559.747539",
            "1400.650082", "-479.6489149",
        ),
        error="6.34e-8",
        iterations=12,
        run_tol="1e-10",
        note="non-expansive edges [0,1] and [7,8]; limit realizes 0,4,0,1,0,6,0",
    ),
)
