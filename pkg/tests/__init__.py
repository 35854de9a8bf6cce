"""
splitlink - Tests Package

"""
