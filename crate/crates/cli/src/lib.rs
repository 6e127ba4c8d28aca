//! CLI library (under construction).
