// Copyright 2026 The neurofail Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NEUROFAIL_H_
#define NEUROFAIL_H_

#include <stddef.h>

#if defined(_WIN32)
#if defined(NEUROFAIL_BUILDING)
#define NF_API __declspec(dllexport)
#else
#define NF_API __declspec(dllimport)
#endif
#else
#define NF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nf_status {
  NF_OK = 0,
  NF_ERR_DOMAIN = 1,
  NF_ERR_SHAPE = 2,
  NF_ERR_PARSE = 3,
  NF_ERR_SCENARIO = 4,
  NF_ERR_POLICY = 5,
  NF_ERR_ARGUMENT = 6,
  NF_ERR_CAP = 7,
  NF_ERR_TRAINING = 8,
  NF_ERR_VIOLATION = 9,
  NF_ERR_IO = 10,
  NF_ERR_INTERNAL = 11
} nf_status;

typedef enum nf_fault_kind { NF_NEURONS = 0, NF_SYNAPSES = 1 } nf_fault_kind;

typedef struct nf_network nf_network;

// Message of the last failed call on this thread ("" if none).
NF_API const char* nf_last_error(void);
NF_API const char* nf_status_name(nf_status status);
NF_API const char* nf_version(void);

NF_API nf_status nf_network_load(const char* path, nf_network** out);
NF_API nf_status nf_network_parse(const char* json, nf_network** out);
NF_API nf_status nf_network_save(const nf_network* net, const char* path);
// *out must be released with nf_string_free.
NF_API nf_status nf_network_to_json(const nf_network* net, char** out);
NF_API void nf_network_free(nf_network* net);

NF_API nf_status nf_network_shape(const nf_network* net, size_t* input_dim, size_t* layers);
NF_API nf_status nf_network_layer_size(const nf_network* net, size_t layer, size_t* size);
NF_API nf_status nf_network_forward(const nf_network* net, const double* x, size_t n,
                                    double* out);

// counts has one entry per layer (L for neurons, L + 1 for synapses).
NF_API nf_status nf_fep(const nf_network* net, nf_fault_kind kind, const size_t* counts,
                        size_t n_counts, double capacity, double* fep);
NF_API nf_status nf_certify(const nf_network* net, nf_fault_kind kind, const size_t* counts,
                            size_t n_counts, double eps, double eps_prime, double capacity,
                            int* certified, double* fep);
NF_API nf_status nf_quantization_bound(const nf_network* net, const double* lambdas,
                                       size_t n, double* bound);

// JSON request/response entry point. op is one of: analyze, certify, train,
// inject, soundness, sweep_k, quantize, boost, brute_check, lemma1_demo,
// tightness. The response is always written when response is non-null, also
// on failure ({"error", "kind", optional "counterexample"}). Release it with
// nf_string_free.
NF_API nf_status nf_call(const char* op, const char* request, char** response);

NF_API void nf_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif  // NEUROFAIL_H_
