"""Conditional densities over explicit base measures and grid Bayesian inference."""
