"""
asymvol package
Realized-volatility measures, asymmetric HAR models and forecast evaluation
"""

__version__ = '1.0.0'
__author__ = 'asymvol Team'
