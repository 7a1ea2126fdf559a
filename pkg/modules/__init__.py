# Core application modules 