# Scorecard export and plot-ready tables
