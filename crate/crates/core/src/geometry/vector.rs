use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub};

use crate::real::Real;

/// Cartesian 3-vector. Also used for points.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

pub type Point3<T> = Vec3<T>;

impl<T: Real> Vec3<T> {
    #[inline]
    pub const fn new(x: T, y: T, z: T) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Vec3::new(T::zero(), T::zero(), T::zero())
    }

    pub fn from_f64(v: [f64; 3]) -> Self {
        Vec3::new(T::lit(v[0]), T::lit(v[1]), T::lit(v[2]))
    }

    pub fn to_f64(self) -> [f64; 3] {
        [self.x.to_f64_lossy(), self.y.to_f64_lossy(), self.z.to_f64_lossy()]
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y).hypot(self.z)
    }

    #[inline]
    pub fn distance(self, o: Self) -> T {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, k: T) -> Self {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl<T: Real> Div<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn div(self, k: T) -> Self {
        Vec3::new(self.x / k, self.y / k, self.z / k)
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

/// Vector of unit length (within 1e-12 in `f64`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitVec3<T>(Vec3<T>);

impl<T: Real> UnitVec3<T> {
    /// Normalizes `v`; `None` for zero or non-finite input.
    pub fn new_normalize(v: Vec3<T>) -> Option<Self> {
        let n = v.norm();
        if n > T::zero() && n.is_finite() {
            Some(UnitVec3(v / n))
        } else {
            None
        }
    }

    #[inline]
    pub fn into_inner(self) -> Vec3<T> {
        self.0
    }

    #[inline]
    pub fn as_vec(&self) -> &Vec3<T> {
        &self.0
    }

    pub fn flipped(self) -> Self {
        UnitVec3(-self.0)
    }

    /// Orthonormal `(e1, e2)` with `e1 × e2 = self`. For `+z` this is
    /// `(+x, +y)`.
    pub fn tangent_frame(&self) -> (Vec3<T>, Vec3<T>) {
        let n = self.0;
        let a = if n.x.abs() < T::lit(0.9) {
            Vec3::new(T::one(), T::zero(), T::zero())
        } else {
            Vec3::new(T::zero(), T::one(), T::zero())
        };
        let e1 = (a - n * a.dot(n)) / (a - n * a.dot(n)).norm();
        let e2 = n.cross(e1);
        (e1, e2)
    }
}

impl<T: Real> std::ops::Deref for UnitVec3<T> {
    type Target = Vec3<T>;
    fn deref(&self) -> &Vec3<T> {
        &self.0
    }
}
