//! A minimal continuation monad: a computation is a function from "what to
//! do next" to the final answer.

/// `Comp a r`: a computation producing an `A` for a continuation whose
/// answer type is `R`.
pub struct Comp<'a, A, R>(Box<dyn FnOnce(Box<dyn FnOnce(A) -> R + 'a>) -> R + 'a>);

/// A unary function value inside a computation.
pub type Func<'a, A, B> = Box<dyn FnOnce(A) -> B + 'a>;

impl<'a, A: 'a, R: 'a> Comp<'a, A, R> {
    pub fn new(f: impl FnOnce(Box<dyn FnOnce(A) -> R + 'a>) -> R + 'a) -> Self {
        Comp(Box::new(f))
    }

    /// Lifts a constant: `\k -> k a`.
    pub fn pure(a: A) -> Self {
        Comp(Box::new(move |k| k(a)))
    }

    pub fn run(self, k: impl FnOnce(A) -> R + 'a) -> R {
        (self.0)(Box::new(k))
    }
}

/// `cpsApply m n = \k -> n (\b -> m (\a -> k (a b)))`
pub fn cps_apply<'a, A: 'a, B: 'a, R: 'a>(m: Comp<'a, Func<'a, A, B>, R>, n: Comp<'a, A, R>) -> Comp<'a, B, R> {
    Comp(Box::new(move |k| n.run(move |b| m.run(move |a| k(a(b))))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn applies_under_identity_continuation() {
        let m: Comp<Func<i32, i32>, i32> = Comp::pure(Box::new(|x| x * 10));
        let n = Comp::pure(4);
        assert_eq!(cps_apply(m, n).run(|v| v), 40);
    }

    #[test]
    fn argument_is_evaluated_before_function() {
        use std::cell::RefCell;
        use std::rc::Rc;
        let order = Rc::new(RefCell::new(Vec::new()));
        let (om, on) = (order.clone(), order.clone());
        let m: Comp<Func<i32, i32>, ()> = Comp::new(move |k| {
            om.borrow_mut().push("m");
            let f: Func<i32, i32> = Box::new(|x| x + 1);
            k(f)
        });
        let n: Comp<i32, ()> = Comp::new(move |k| {
            on.borrow_mut().push("n");
            k(1)
        });
        cps_apply(m, n).run(|v| assert_eq!(v, 2));
        assert_eq!(*order.borrow(), vec!["n", "m"]);
    }
}
