# Frontend module initialization
