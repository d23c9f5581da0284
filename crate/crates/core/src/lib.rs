pub mod brown_gitler;
pub mod ext_ehp;
pub mod gf2;
pub mod lambda;
pub mod resolution;
pub mod steenrod;
