"""Fuzzy-logic feature selection and from-scratch classifiers for IDS data."""

__version__ = "0.1.0"
