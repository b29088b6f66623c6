//! Secondary homoclinic tangencies (work in progress).
