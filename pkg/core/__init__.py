# Core module initialization

