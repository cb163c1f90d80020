# Biabduction module initialization
