"""Iterative equilibrium solvers: XFP, CFR, CFR-BR and Exploitability Descent."""
