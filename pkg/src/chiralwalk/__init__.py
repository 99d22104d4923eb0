"""Fredholm indices, essential spectra and protected eigenstates of
strictly local operators, with the chiral split-step walk built in."""

__version__ = "0.1.0"
