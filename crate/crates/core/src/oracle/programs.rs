//! Benchmark programs.

pub const BIRTHDAY: &str = include_str!("../../programs/birthday.pl");
pub const PALINDROME: &str = include_str!("../../programs/palindrome.pl");
