/*
   Copyright 2026 The Chainfab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "chainfab/canonical.hpp"
#include "chainfab/crypto.hpp"

namespace chainfab {

using Amount = std::int64_t;
using UnixSeconds = std::int64_t;

enum class TxKind { ServiceRequest, ServiceOffer, OfferAcceptance, DeliveryConfirmation, Transfer, Coinbase };

std::string_view to_string(TxKind kind);
std::optional<TxKind> parse_tx_kind(std::string_view name);

// The request id is the tx_id of the transaction carrying this payload, so it
// is not a field here.
struct ServiceRequestPayload {
    std::string product_spec;
    std::string process_tag;
    UnixSeconds due_date = 0;
    Amount max_price = 0;
    bool operator==(const ServiceRequestPayload&) const = default;
};

struct ServiceOfferPayload {
    Digest256 request_id;
    Amount quoted_price = 0;
    UnixSeconds promised_due_date = 0;
    bool operator==(const ServiceOfferPayload&) const = default;
};

struct OfferAcceptancePayload {
    Digest256 request_id;
    Digest256 offer_id;
    bool operator==(const OfferAcceptancePayload&) const = default;
};

struct DeliveryConfirmationPayload {
    Digest256 request_id;
    bool operator==(const DeliveryConfirmationPayload&) const = default;
};

struct TransferPayload {
    Address to;
    Amount amount = 0;
    std::string memo;  // lets otherwise identical transfers have distinct ids
    bool operator==(const TransferPayload&) const = default;
};

struct CoinbasePayload {
    std::uint64_t height = 0;
    Address miner;
    Amount amount = 0;
    bool operator==(const CoinbasePayload&) const = default;
};

using TxPayload = std::variant<ServiceRequestPayload, ServiceOfferPayload, OfferAcceptancePayload,
                               DeliveryConfirmationPayload, TransferPayload, CoinbasePayload>;

/// A marketplace or monetary action. Everything except Coinbase carries the
/// sender's public key and a signature over the signing preimage (the
/// canonical encoding with the "signature" field removed).
struct Transaction {
    TxPayload payload;
    std::optional<PublicKey> sender_public;
    std::optional<Signature> signature;

    [[nodiscard]] TxKind kind() const { return static_cast<TxKind>(payload.index()); }
    [[nodiscard]] std::optional<Address> sender() const;

    [[nodiscard]] Json to_json() const;
    static Transaction from_json(const Json& j);

    [[nodiscard]] std::string signing_preimage() const;
    [[nodiscard]] std::string encode() const { return canonical_encode(to_json()); }
    [[nodiscard]] Digest256 id() const { return hash_bytes(encode()); }

    [[nodiscard]] bool signature_valid() const;

    template <typename P>
    [[nodiscard]] const P* as() const {
        return std::get_if<P>(&payload);
    }

    bool operator==(const Transaction&) const = default;
};

Transaction make_signed(const KeyPair& key, TxPayload payload);
Transaction make_coinbase(std::uint64_t height, const Address& miner, Amount amount);

Json payload_to_json(const TxPayload& payload);
// Strict: exactly the fields of that kind. Throws DecodeError.
TxPayload payload_from_json(TxKind kind, const Json& j);

}  // namespace chainfab
