//! Forward-in-time population models (under construction).
