fn main() {
    println!("{}", tcval_core::placeholder());
}
