# Indicator weight tree: model, parsing and validation
