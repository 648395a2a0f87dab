"""Solar generation forecasting from maintenance logs."""
