"""Exact toolkit for amalgams of finite groups acting on their Bass-Serre trees."""

__version__ = "0.1.0"
