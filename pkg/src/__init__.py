"""
Main application module. Here we declare the main command group and
execute the bootstrap function for things that must happen first
"""

from src.application import Application

app = Application()
app.bootstrap()
