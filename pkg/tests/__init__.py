""" Do not delete"""
