"""Numerical services: linear algebra, tensor norms, walk counts, LPS towers and reports"""
