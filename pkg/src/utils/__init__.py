"""
NC-Chern - Utility modules

Configuration, logging, performance timing and the ordered task pool.
"""
