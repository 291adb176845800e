#include "scol/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <sstream>

namespace scol {

std::vector<std::uint8_t> frame_message(const Message& m) {
    std::vector<std::uint8_t> out;
    out.reserve(kFrameHeaderSize + m.payload.size());
    out.push_back(static_cast<std::uint8_t>(kWireMagic >> 24));
    out.push_back(static_cast<std::uint8_t>(kWireMagic >> 16));
    out.push_back(static_cast<std::uint8_t>(kWireMagic >> 8));
    out.push_back(static_cast<std::uint8_t>(kWireMagic));
    out.push_back(kWireVersion);
    out.push_back(m.msg_type);
    put_le64(out, m.session_id);
    out.push_back(static_cast<std::uint8_t>(m.sender));
    out.push_back(static_cast<std::uint8_t>(m.receiver));
    out.push_back(static_cast<std::uint8_t>(m.phase));
    put_le64(out, m.sequence);
    put_le32(out, static_cast<std::uint32_t>(m.payload.size()));
    out.insert(out.end(), m.payload.begin(), m.payload.end());
    return out;
}

Message parse_message(const std::uint8_t* p, std::size_t len) {
    if (len < kFrameHeaderSize) throw TransportError("message frame too short");
    std::uint32_t magic = (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
                          (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
    if (magic != kWireMagic) throw TransportError("bad frame magic");
    if (p[4] != kWireVersion) throw TransportError("unsupported frame version");
    Message m;
    m.msg_type = p[5];
    m.session_id = get_le64(p + 6);
    m.sender = p[14];
    m.receiver = p[15];
    m.phase = static_cast<PhaseTag>(p[16]);
    m.sequence = get_le64(p + 17);
    std::uint32_t plen = get_le32(p + 25);
    if (len < kFrameHeaderSize + plen) throw TransportError("truncated frame payload");
    m.payload.assign(p + kFrameHeaderSize, p + kFrameHeaderSize + plen);
    return m;
}

std::string TrafficStats::report() const {
    std::ostringstream os;
    for (const auto& [name, s] : phases) {
        os << "phase=" << name << " bytes_out=" << s.bytes_out << " bytes_in=" << s.bytes_in
           << " rounds=" << s.rounds << " millis=" << s.millis << "\n";
    }
    return os.str();
}

InProcNet::InProcNet(int parties, u64 session_id)
    : parties_(parties), session_id_(session_id), stats_(static_cast<std::size_t>(parties) + 1) {}

void InProcNet::send(Message m) {
    m.session_id = session_id_;
    auto key = std::make_pair(m.sender, m.receiver);
    m.sequence = seq_[key]++;
    auto framed = frame_message(m);
    for (auto b : framed) transcript_hash_ = (transcript_hash_ ^ b) * 1099511628211ull;
    ++messages_sent_;
    u64 n = m.payload.size();
    if (m.sender >= 0 && m.sender < parties_)
        stats_[static_cast<std::size_t>(m.sender)].phases[phase_label_].bytes_out += n;
    if (m.receiver >= 0 && m.receiver < parties_)
        stats_[static_cast<std::size_t>(m.receiver)].phases[phase_label_].bytes_in += n;
    channels_[key].push_back(std::move(m));
}

Message InProcNet::recv(PartyId receiver, PartyId from) {
    auto key = std::make_pair(from, receiver);
    auto it = channels_.find(key);
    if (it == channels_.end() || it->second.empty())
        throw TransportError("recv on empty channel");
    Message m = std::move(it->second.front());
    it->second.pop_front();
    return m;
}

// --- TCP ---

static void send_all(int fd, const std::uint8_t* p, std::size_t n) {
    while (n > 0) {
        ssize_t w = ::write(fd, p, n);
        if (w <= 0) throw TransportError("tcp write failed");
        p += w;
        n -= static_cast<std::size_t>(w);
    }
}

static void recv_all(int fd, std::uint8_t* p, std::size_t n) {
    while (n > 0) {
        ssize_t r = ::read(fd, p, n);
        if (r <= 0) throw TransportError("tcp read failed or channel closed");
        p += r;
        n -= static_cast<std::size_t>(r);
    }
}

TcpChannel TcpChannel::listen_accept(int port) {
    int srv = ::socket(AF_INET, SOCK_STREAM, 0);
    if (srv < 0) throw TransportError("socket() failed");
    int one = 1;
    ::setsockopt(srv, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::bind(srv, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 || ::listen(srv, 1) < 0) {
        ::close(srv);
        throw TransportError("bind/listen failed");
    }
    int fd = ::accept(srv, nullptr, nullptr);
    ::close(srv);
    if (fd < 0) throw TransportError("accept failed");
    return TcpChannel(fd);
}

TcpChannel TcpChannel::connect_to(const std::string& host, int port) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw TransportError("socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw TransportError("bad address");
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
        ::close(fd);
        throw TransportError("connect failed");
    }
    return TcpChannel(fd);
}

TcpChannel::~TcpChannel() {
    if (fd_ >= 0) ::close(fd_);
}

TcpChannel::TcpChannel(TcpChannel&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

void TcpChannel::send(const Message& m) {
    auto framed = frame_message(m);
    send_all(fd_, framed.data(), framed.size());
}

Message TcpChannel::recv() {
    std::vector<std::uint8_t> head(kFrameHeaderSize);
    recv_all(fd_, head.data(), head.size());
    std::uint32_t plen = get_le32(head.data() + 25);
    std::vector<std::uint8_t> buf(head);
    buf.resize(kFrameHeaderSize + plen);
    recv_all(fd_, buf.data() + kFrameHeaderSize, plen);
    return parse_message(buf.data(), buf.size());
}

}  // namespace scol
