"""Exact polyhedral calculus of normal cones, subdifferentials and coderivatives."""

__version__ = "0.1.0"
