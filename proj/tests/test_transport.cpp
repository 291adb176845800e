#include <thread>

#include "doctest.h"
#include "scol/transport.hpp"

using namespace scol;

TEST_CASE("frame layout is byte-exact") {
    Message m;
    m.msg_type = 7;
    m.session_id = 0x1122334455667788ull;
    m.sender = 1;
    m.receiver = 0;
    m.phase = PhaseTag::OPEN;
    m.sequence = 0xAABB;
    m.payload = {0xDE, 0xAD, 0xBE, 0xEF};
    auto f = frame_message(m);
    REQUIRE(f.size() == kFrameHeaderSize + 4);
    // magic "SCOL" big-endian
    CHECK(f[0] == 0x53);
    CHECK(f[1] == 0x43);
    CHECK(f[2] == 0x4F);
    CHECK(f[3] == 0x4C);
    CHECK(f[4] == kWireVersion);
    CHECK(f[5] == 7);
    CHECK(f[6] == 0x88);  // session id little-endian
    CHECK(f[13] == 0x11);
    CHECK(f[14] == 1);  // sender
    CHECK(f[15] == 0);  // receiver
    CHECK(f[16] == static_cast<std::uint8_t>(PhaseTag::OPEN));
    CHECK(f[17] == 0xBB);  // sequence little-endian
    CHECK(f[18] == 0xAA);
    CHECK(f[25] == 4);  // payload_len little-endian
    CHECK(f[29] == 0xDE);

    Message back = parse_message(f.data(), f.size());
    CHECK(back.msg_type == m.msg_type);
    CHECK(back.session_id == m.session_id);
    CHECK(back.sender == m.sender);
    CHECK(back.receiver == m.receiver);
    CHECK(back.phase == m.phase);
    CHECK(back.sequence == m.sequence);
    CHECK(back.payload == m.payload);
}

TEST_CASE("parse rejects malformed frames") {
    Message m;
    m.payload = {1, 2, 3};
    auto f = frame_message(m);
    CHECK_THROWS_AS(parse_message(f.data(), kFrameHeaderSize - 1), TransportError);
    CHECK_THROWS_AS(parse_message(f.data(), f.size() - 1), TransportError);
    auto bad_magic = f;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(parse_message(bad_magic.data(), bad_magic.size()), TransportError);
    auto bad_version = f;
    bad_version[4] = 99;
    CHECK_THROWS_AS(parse_message(bad_version.data(), bad_version.size()), TransportError);
}

TEST_CASE("in-process channels deliver in order and count traffic") {
    InProcNet net(2, 42);
    for (int i = 0; i < 3; ++i) {
        Message m;
        m.sender = 0;
        m.receiver = 1;
        m.phase = PhaseTag::SECURE_TRAIN;
        m.payload.assign(static_cast<std::size_t>(10 + i), static_cast<std::uint8_t>(i));
        net.send(std::move(m));
    }
    CHECK(net.messages_sent() == 3);
    for (u64 i = 0; i < 3; ++i) {
        Message m = net.recv(1, 0);
        CHECK(m.sequence == i);
        CHECK(m.session_id == 42);
        CHECK(m.payload.size() == 10 + i);
    }
    CHECK_THROWS_AS(net.recv(1, 0), TransportError);  // channel drained
    CHECK(net.stats(0).phases.at(net.phase_label()).bytes_out == 10 + 11 + 12);
    CHECK(net.stats(1).phases.at(net.phase_label()).bytes_in == 10 + 11 + 12);
}

TEST_CASE("transcript hash changes with any byte") {
    auto hash_for = [](std::uint8_t b) {
        InProcNet net(2);
        Message m;
        m.sender = 0;
        m.receiver = 1;
        m.payload = {b};
        net.send(std::move(m));
        return net.transcript_hash();
    };
    CHECK(hash_for(1) == hash_for(1));
    CHECK(hash_for(1) != hash_for(2));
}

TEST_CASE("tcp transport round trips frames") {
    const int port = 39417;
    std::vector<Message> got;
    std::thread server([&] {
        TcpChannel ch = TcpChannel::listen_accept(port);
        got.push_back(ch.recv());
        Message reply;
        reply.msg_type = 2;
        reply.sender = 1;
        reply.payload = {9, 9};
        ch.send(reply);
    });
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    TcpChannel client = TcpChannel::connect_to("127.0.0.1", port);
    Message m;
    m.msg_type = 1;
    m.payload.assign(1000, 0x5C);
    client.send(m);
    Message reply = client.recv();
    server.join();
    REQUIRE(got.size() == 1);
    CHECK(got[0].payload == m.payload);
    CHECK(reply.msg_type == 2);
    CHECK(reply.payload == std::vector<std::uint8_t>{9, 9});
}
