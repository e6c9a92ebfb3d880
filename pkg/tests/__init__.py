"""
NC-Chern - Test Suite

Unit and integration tests for the estimators, oracles and command line.
"""
