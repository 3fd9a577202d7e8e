# Composite index engine: indicator trees, scoring, comparison and sensitivity
