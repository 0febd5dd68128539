#pragma once

#include "aniso/error.hpp"
#include "aniso/linalg.hpp"
#include "aniso/parallel.hpp"
#include "aniso/dilation.hpp"
#include "aniso/quasinorm.hpp"
#include "aniso/exponents.hpp"
#include "aniso/field.hpp"
#include "aniso/partition.hpp"
#include "aniso/mihlin.hpp"
#include "aniso/kernel.hpp"
#include "aniso/atoms.hpp"
#include "aniso/operator.hpp"
#include "aniso/io.hpp"
#include "aniso/verify.hpp"
