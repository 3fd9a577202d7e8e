# Observation file ingestion
