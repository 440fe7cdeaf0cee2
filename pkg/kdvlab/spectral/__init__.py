"""Spectral substrate: grids, solitons and the weighted linearized operator"""
