//! Hosts the `acceptance` test target, which runs every criterion in
//! `hybridwigner::verify` and prints one line per criterion.
