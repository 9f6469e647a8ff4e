#![allow(dead_code)]
pub mod bibforge;
pub mod criteria;
pub mod oracle;
pub mod pairs;
pub mod sim;
