# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
# Compiled amplitude kernels. Same contract as _statevector_py: little-endian
# complex128 buffers mutated in place.

from libc.math cimport cos, sin, sqrt

ctypedef double complex cplx


def apply_rx(cplx[::1] amps, Py_ssize_t qubit, double theta):
    cdef Py_ssize_t dim = amps.shape[0]
    cdef Py_ssize_t step = (<Py_ssize_t>1) << qubit
    cdef Py_ssize_t mask = step - 1
    cdef double c = cos(0.5 * theta)
    cdef cplx mis = -1j * sin(0.5 * theta)
    cdef Py_ssize_t i, i0, i1
    cdef cplx a0, a1
    with nogil:
        for i in range(dim >> 1):
            i0 = ((i & ~mask) << 1) | (i & mask)
            i1 = i0 | step
            a0 = amps[i0]
            a1 = amps[i1]
            amps[i0] = c * a0 + mis * a1
            amps[i1] = mis * a0 + c * a1


def apply_ry(cplx[::1] amps, Py_ssize_t qubit, double theta):
    cdef Py_ssize_t dim = amps.shape[0]
    cdef Py_ssize_t step = (<Py_ssize_t>1) << qubit
    cdef Py_ssize_t mask = step - 1
    cdef double c = cos(0.5 * theta)
    cdef double s = sin(0.5 * theta)
    cdef Py_ssize_t i, i0, i1
    cdef cplx a0, a1
    with nogil:
        for i in range(dim >> 1):
            i0 = ((i & ~mask) << 1) | (i & mask)
            i1 = i0 | step
            a0 = amps[i0]
            a1 = amps[i1]
            amps[i0] = c * a0 - s * a1
            amps[i1] = s * a0 + c * a1


def apply_rz(cplx[::1] amps, Py_ssize_t qubit, double theta):
    cdef Py_ssize_t dim = amps.shape[0]
    cdef Py_ssize_t step = (<Py_ssize_t>1) << qubit
    cdef cplx p0 = cos(0.5 * theta) - 1j * sin(0.5 * theta)
    cdef cplx p1 = cos(0.5 * theta) + 1j * sin(0.5 * theta)
    cdef Py_ssize_t i
    with nogil:
        for i in range(dim):
            if i & step:
                amps[i] = amps[i] * p1
            else:
                amps[i] = amps[i] * p0


def apply_h(cplx[::1] amps, Py_ssize_t qubit):
    cdef Py_ssize_t dim = amps.shape[0]
    cdef Py_ssize_t step = (<Py_ssize_t>1) << qubit
    cdef Py_ssize_t mask = step - 1
    cdef double r = 1.0 / sqrt(2.0)
    cdef Py_ssize_t i, i0, i1
    cdef cplx a0, a1
    with nogil:
        for i in range(dim >> 1):
            i0 = ((i & ~mask) << 1) | (i & mask)
            i1 = i0 | step
            a0 = amps[i0]
            a1 = amps[i1]
            amps[i0] = r * (a0 + a1)
            amps[i1] = r * (a0 - a1)


def apply_cx(cplx[::1] amps, Py_ssize_t control, Py_ssize_t target):
    cdef Py_ssize_t dim = amps.shape[0]
    cdef Py_ssize_t cbit = (<Py_ssize_t>1) << control
    cdef Py_ssize_t tbit = (<Py_ssize_t>1) << target
    cdef Py_ssize_t i, j
    cdef cplx tmp
    with nogil:
        for i in range(dim):
            if (i & cbit) and not (i & tbit):
                j = i | tbit
                tmp = amps[i]
                amps[i] = amps[j]
                amps[j] = tmp


def apply_cz(cplx[::1] amps, Py_ssize_t qa, Py_ssize_t qb):
    cdef Py_ssize_t dim = amps.shape[0]
    cdef Py_ssize_t abit = (<Py_ssize_t>1) << qa
    cdef Py_ssize_t bbit = (<Py_ssize_t>1) << qb
    cdef Py_ssize_t both = abit | bbit
    cdef Py_ssize_t i
    with nogil:
        for i in range(dim):
            if (i & both) == both:
                amps[i] = -amps[i]


def apply_phase_table(cplx[::1] amps, double gamma, double[::1] energies):
    cdef Py_ssize_t dim = amps.shape[0]
    cdef Py_ssize_t i
    cdef double ph
    with nogil:
        for i in range(dim):
            ph = gamma * energies[i]
            amps[i] = amps[i] * (cos(ph) - 1j * sin(ph))
