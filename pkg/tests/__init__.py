"""
Test suite for the quantum reservoir simulator.
"""
