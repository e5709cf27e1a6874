#include "proto_internal.hpp"
