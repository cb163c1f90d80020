# Extrapolation module initialization
