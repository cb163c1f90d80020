# Interpreter module initialization
