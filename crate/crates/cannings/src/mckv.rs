//! McKean-Vlasov process (under construction).
