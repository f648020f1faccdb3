"""Watson-like lattice integrals, their hypergeometric closed forms, and
the spin-wave observables built on them."""
