# Separation logic module initialization
