from django.apps import AppConfig


class SpdTransportConfig(AppConfig):
    name = 'spdtransport'
    verbose_name = 'SPD domain adaptation'
    default_auto_field = 'django.db.models.AutoField'
